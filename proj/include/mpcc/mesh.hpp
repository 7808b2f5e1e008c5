#pragma once

#include <array>
#include <vector>

namespace mpcc {

/// Structured triangulation of the unit square (0,1)^2.
///
/// The grid has nx cells per axis; every cell is split into two triangles
/// along the diagonal from its lower-left to its upper-right corner.
/// Vertices are laid out row-major: index j*(nx+1)+i for grid position
/// (i, j), i.e. the point (i/nx, j/nx).
struct Mesh {
    int nx = 0;
    std::vector<std::array<double, 2>> vertices;
    std::vector<std::array<int, 3>> elements;
    std::vector<double> element_area;

    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_elements() const { return static_cast<int>(elements.size()); }

    int vertex_index(int i, int j) const { return j * (nx + 1) + i; }

    std::array<double, 2> centroid(int element) const;
};

/// Builds the structured mesh with nx >= 1 cells per axis.
Mesh build_structured_mesh(int nx);

} // namespace mpcc
