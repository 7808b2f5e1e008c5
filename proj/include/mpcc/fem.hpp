#pragma once

#include <span>
#include <vector>

#include "mpcc/linalg.hpp"
#include "mpcc/mesh.hpp"

namespace mpcc {

/// The constant-coefficient finite-element matrices used throughout:
/// P1 mass M1(1), P0 mass M0(1) (stored as its diagonal, the element
/// areas), stiffness K(1) and the P1 -> P0 projection E10 whose rows
/// evaluate a nodal function at element centroids.
struct FemMatrices {
    int n_p = 0;
    int n_e = 0;
    SpMat m1;  // n_p x n_p
    Vec m0;    // diagonal of the n_e x n_e P0 mass matrix
    SpMat k1;  // n_p x n_p
    SpMat e10; // n_e x n_p
};

/// Sparse n_p x (nx+1) map replicating a coefficient vector indexed by
/// the distinct x1 grid coordinates along the x2 direction. Each row has
/// a single unit entry, so expansion is exact value copying.
struct ReductionMap {
    SpMat r;

    int reduced_dim() const { return static_cast<int>(r.cols()); }
    int full_dim() const { return static_cast<int>(r.rows()); }

    /// Copies reduced coefficients onto the full nodal grid.
    Vec expand(const Vec& reduced) const;

    /// Left inverse of expand for vectors in the range of the map
    /// (least-squares pullback otherwise).
    Vec reduce(const Vec& full) const;
};

/// Identity map for problems without gradient constraints.
ReductionMap identity_reduction(int n_p);

/// Coefficient-weighted P1 mass matrix, coef given per element.
SpMat assemble_m1(const Mesh& mesh, const Vec& coef);

/// Stiffness matrix with one SPD 2x2 coefficient matrix per element.
SpMat assemble_k(const Mesh& mesh, std::span<const Mat2> coef);

/// Stiffness matrix with a single SPD coefficient matrix on all elements.
SpMat assemble_k(const Mesh& mesh, const Mat2& coef);

/// P1 -> P0 projection; row e holds 1/3 at the vertices of element e.
SpMat assemble_e10(const Mesh& mesh);

/// Discrete realization of controls constant along x2 on the structured grid.
ReductionMap assemble_reduction(const Mesh& mesh);

/// Builds the standard constant-coefficient matrix set for a mesh.
FemMatrices assemble_fem_matrices(const Mesh& mesh);

} // namespace mpcc
