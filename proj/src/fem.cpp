#include "mpcc/fem.hpp"

#include <cmath>
#include <stdexcept>

namespace mpcc {

namespace {

struct ElementGeometry {
    double area;
    // Barycentric basis gradients, one column per local vertex.
    Eigen::Matrix<double, 2, 3> grad;
};

ElementGeometry element_geometry(const Mesh& mesh, int e) {
    const auto& tri = mesh.elements[e];
    const auto& p0 = mesh.vertices[tri[0]];
    const auto& p1 = mesh.vertices[tri[1]];
    const auto& p2 = mesh.vertices[tri[2]];

    const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) -
                       (p2[0] - p0[0]) * (p1[1] - p0[1]);
    ElementGeometry geo;
    geo.area = 0.5 * std::abs(det);
    // grad(lambda_i) = (y_j - y_k, x_k - x_j) / det, indices cyclic.
    geo.grad.col(0) << (p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det;
    geo.grad.col(1) << (p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det;
    geo.grad.col(2) << (p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det;
    return geo;
}

} // namespace

Vec ReductionMap::expand(const Vec& reduced) const {
    if (reduced.size() != r.cols()) {
        throw std::invalid_argument("ReductionMap::expand: dimension mismatch");
    }
    return r * reduced;
}

Vec ReductionMap::reduce(const Vec& full) const {
    if (full.size() != r.rows()) {
        throw std::invalid_argument("ReductionMap::reduce: dimension mismatch");
    }
    const Vec counts = r.transpose() * Vec::Ones(r.rows());
    return (r.transpose() * full).cwiseQuotient(counts);
}

ReductionMap identity_reduction(int n_p) {
    SpMat id(n_p, n_p);
    id.setIdentity();
    return ReductionMap{std::move(id)};
}

SpMat assemble_m1(const Mesh& mesh, const Vec& coef) {
    if (coef.size() != mesh.n_elements()) {
        throw std::invalid_argument("assemble_m1: coef must have one entry per element");
    }

    std::vector<Triplet> triplets;
    triplets.reserve(9u * mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& tri = mesh.elements[e];
        const double s = coef[e] * mesh.element_area[e] / 12.0;
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                triplets.emplace_back(tri[a], tri[b], (a == b ? 2.0 : 1.0) * s);
            }
        }
    }
    SpMat m1(mesh.n_vertices(), mesh.n_vertices());
    m1.setFromTriplets(triplets.begin(), triplets.end());
    return m1;
}

SpMat assemble_k(const Mesh& mesh, std::span<const Mat2> coef) {
    if (static_cast<int>(coef.size()) != mesh.n_elements()) {
        throw std::invalid_argument("assemble_k: coef must have one matrix per element");
    }

    std::vector<Triplet> triplets;
    triplets.reserve(9u * mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const Mat2& c = coef[e];
        const double asym = std::abs(c(0, 1) - c(1, 0));
        if (asym > 1e-12 * (1.0 + c.cwiseAbs().maxCoeff()) || c(0, 0) <= 0.0 ||
            c.determinant() <= 0.0) {
            throw std::invalid_argument("assemble_k: coefficient matrix must be SPD");
        }

        const auto& tri = mesh.elements[e];
        const auto geo = element_geometry(mesh, e);
        const Eigen::Matrix3d local =
            geo.area * geo.grad.transpose() * c * geo.grad;
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                triplets.emplace_back(tri[a], tri[b], local(a, b));
            }
        }
    }
    SpMat k(mesh.n_vertices(), mesh.n_vertices());
    k.setFromTriplets(triplets.begin(), triplets.end());
    return k;
}

SpMat assemble_k(const Mesh& mesh, const Mat2& coef) {
    std::vector<Mat2> per_element(mesh.n_elements(), coef);
    return assemble_k(mesh, per_element);
}

SpMat assemble_e10(const Mesh& mesh) {
    std::vector<Triplet> triplets;
    triplets.reserve(3u * mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e) {
        for (int v : mesh.elements[e]) {
            triplets.emplace_back(e, v, 1.0 / 3.0);
        }
    }
    SpMat e10(mesh.n_elements(), mesh.n_vertices());
    e10.setFromTriplets(triplets.begin(), triplets.end());
    return e10;
}

ReductionMap assemble_reduction(const Mesh& mesh) {
    if (mesh.nx < 1 ||
        mesh.n_vertices() != (mesh.nx + 1) * (mesh.nx + 1) ||
        mesh.n_elements() != 2 * mesh.nx * mesh.nx) {
        throw std::invalid_argument("assemble_reduction: structured mesh required");
    }

    const int n1 = mesh.nx + 1;
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(n1) * n1);
    for (int j = 0; j < n1; ++j) {
        for (int i = 0; i < n1; ++i) {
            triplets.emplace_back(mesh.vertex_index(i, j), i, 1.0);
        }
    }
    SpMat r(mesh.n_vertices(), n1);
    r.setFromTriplets(triplets.begin(), triplets.end());
    return ReductionMap{std::move(r)};
}

FemMatrices assemble_fem_matrices(const Mesh& mesh) {
    FemMatrices fem;
    fem.n_p = mesh.n_vertices();
    fem.n_e = mesh.n_elements();
    fem.m1 = assemble_m1(mesh, Vec::Ones(mesh.n_elements()));
    fem.m0 = Eigen::Map<const Vec>(mesh.element_area.data(), mesh.n_elements());
    fem.k1 = assemble_k(mesh, Mat2::Identity());
    fem.e10 = assemble_e10(mesh);
    return fem;
}

} // namespace mpcc
