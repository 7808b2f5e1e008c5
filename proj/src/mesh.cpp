#include "mpcc/mesh.hpp"

#include <stdexcept>

namespace mpcc {

std::array<double, 2> Mesh::centroid(int element) const {
    const auto& tri = elements[element];
    double cx = 0.0;
    double cy = 0.0;
    for (int v : tri) {
        cx += vertices[v][0];
        cy += vertices[v][1];
    }
    return {cx / 3.0, cy / 3.0};
}

Mesh build_structured_mesh(int nx) {
    if (nx < 1) {
        throw std::invalid_argument("build_structured_mesh: nx must be >= 1");
    }

    Mesh mesh;
    mesh.nx = nx;

    const int n1 = nx + 1;
    mesh.vertices.reserve(static_cast<std::size_t>(n1) * n1);
    for (int j = 0; j < n1; ++j) {
        for (int i = 0; i < n1; ++i) {
            mesh.vertices.push_back({static_cast<double>(i) / nx,
                                     static_cast<double>(j) / nx});
        }
    }

    const double cell_area = 0.5 / (static_cast<double>(nx) * nx);
    mesh.elements.reserve(2u * nx * nx);
    mesh.element_area.reserve(2u * nx * nx);
    for (int j = 0; j < nx; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int v00 = mesh.vertex_index(i, j);
            const int v10 = mesh.vertex_index(i + 1, j);
            const int v01 = mesh.vertex_index(i, j + 1);
            const int v11 = mesh.vertex_index(i + 1, j + 1);
            mesh.elements.push_back({v00, v10, v11});
            mesh.elements.push_back({v00, v11, v01});
            mesh.element_area.push_back(cell_area);
            mesh.element_area.push_back(cell_area);
        }
    }
    return mesh;
}

} // namespace mpcc
