#include "mpcc/pde.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <stdexcept>
#include <vector>

#include "mpcc/errors.hpp"

namespace mpcc {

EllipticOperator assemble_elliptic_operator(const Mesh& mesh, const Vec& a_coef,
                                            std::span<const Mat2> diffusion,
                                            const Vec& b_coef, const Vec& c_coef) {
    EllipticOperator op;
    op.a_mat = assemble_m1(mesh, a_coef) + assemble_k(mesh, diffusion);
    op.b_mat = assemble_m1(mesh, b_coef);
    op.c_mat = assemble_m1(mesh, c_coef);
    return op;
}

EllipticOperator assemble_elliptic_operator(const Mesh& mesh, const Vec& a_coef,
                                            const Mat2& diffusion,
                                            const Vec& b_coef, const Vec& c_coef) {
    std::vector<Mat2> per_element(mesh.n_elements(), diffusion);
    return assemble_elliptic_operator(mesh, a_coef, per_element, b_coef, c_coef);
}

struct LinearSolver::Impl {
    SpMat matrix;
    Kind kind;
    Eigen::SimplicialLDLT<SpMat> ldlt;
    Eigen::SparseLU<SpMat> lu;

    explicit Impl(const SpMat& m, Kind k) : matrix(m), kind(k) {
        matrix.makeCompressed();
        if (kind == Kind::Spd) {
            ldlt.compute(matrix);
            if (ldlt.info() != Eigen::Success) {
                throw SolverError("LinearSolver: SPD factorization failed");
            }
            // A residual check alone cannot flag a singular matrix: the
            // kernel component of the solution can be so large that the
            // computed residual cancels to zero. The pivots can.
            const Vec d = ldlt.vectorD();
            if (d.minCoeff() <= 0.0 ||
                d.cwiseAbs().minCoeff() <= 1e-12 * d.cwiseAbs().maxCoeff()) {
                throw SolverError("LinearSolver: matrix numerically singular");
            }
        } else {
            lu.compute(matrix);
            if (lu.info() != Eigen::Success) {
                throw SolverError("LinearSolver: LU factorization failed");
            }
        }
    }

    Vec raw_solve(const Vec& rhs) const {
        return kind == Kind::Spd ? Vec(ldlt.solve(rhs)) : Vec(lu.solve(rhs));
    }
};

LinearSolver::LinearSolver(const SpMat& matrix, Kind kind)
    : impl_(std::make_unique<Impl>(matrix, kind)) {}

LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

Vec LinearSolver::solve(const Vec& rhs) const {
    Vec x = impl_->raw_solve(rhs);
    Vec residual = rhs - impl_->matrix * x;
    x += impl_->raw_solve(residual);
    residual = rhs - impl_->matrix * x;
    if (residual.norm() > 1e-10 * (1.0 + rhs.norm())) {
        throw SolverError("LinearSolver: residual check failed");
    }
    return x;
}

Vec solve_state(const EllipticOperator& op, const Vec& u, const Vec& v) {
    LinearSolver solver(op.a_mat, LinearSolver::Kind::Spd);
    return solve_state(solver, op, u, v);
}

Vec solve_state(const LinearSolver& a_solver, const EllipticOperator& op,
                const Vec& u, const Vec& v) {
    if (u.size() != op.b_mat.cols() || v.size() != op.c_mat.cols()) {
        throw std::invalid_argument("solve_state: control dimension mismatch");
    }
    return a_solver.solve(op.b_mat * u + op.c_mat * v);
}

namespace {

Vec adjoint_rhs(const FemMatrices& fem, const Vec& y, const Vec& yd) {
    if (y.size() != fem.n_p || yd.size() != fem.n_e) {
        throw std::invalid_argument("solve_adjoint: dimension mismatch");
    }
    const Vec observation = fem.e10 * y - yd;
    return fem.e10.transpose() * fem.m0.cwiseProduct(observation);
}

} // namespace

Vec solve_adjoint(const EllipticOperator& op, const FemMatrices& fem,
                  const Vec& y, const Vec& yd) {
    LinearSolver solver(op.a_mat, LinearSolver::Kind::Spd);
    return solver.solve(adjoint_rhs(fem, y, yd));
}

Vec solve_adjoint(const LinearSolver& a_solver, const FemMatrices& fem,
                  const Vec& y, const Vec& yd) {
    return a_solver.solve(adjoint_rhs(fem, y, yd));
}

Vec solve_dirichlet_laplace(const Mesh& mesh,
                            const std::function<double(double)>& g1,
                            const std::function<double(double)>& g2) {
    const int n_p = mesh.n_vertices();
    const int n1 = mesh.nx + 1;
    const SpMat k = assemble_k(mesh, Mat2::Identity());

    // Dirichlet nodes: bottom row (j = 0) and top row (j = nx).
    std::vector<char> is_dirichlet(n_p, 0);
    Vec y = Vec::Zero(n_p);
    for (int i = 0; i < n1; ++i) {
        const double x1 = mesh.vertices[mesh.vertex_index(i, 0)][0];
        const int bottom = mesh.vertex_index(i, 0);
        const int top = mesh.vertex_index(i, mesh.nx);
        is_dirichlet[bottom] = 1;
        is_dirichlet[top] = 1;
        y[bottom] = g1(x1);
        y[top] = g2(x1);
    }

    // Interior (plus Neumann side) unknowns, eliminated symmetrically.
    std::vector<int> free_index(n_p, -1);
    int n_free = 0;
    for (int i = 0; i < n_p; ++i) {
        if (!is_dirichlet[i]) {
            free_index[i] = n_free++;
        }
    }

    std::vector<Triplet> triplets;
    Vec rhs = Vec::Zero(n_free);
    for (int col = 0; col < k.outerSize(); ++col) {
        for (SpMat::InnerIterator it(k, col); it; ++it) {
            const int r = static_cast<int>(it.row());
            const int c = static_cast<int>(it.col());
            if (is_dirichlet[r]) {
                continue;
            }
            if (is_dirichlet[c]) {
                rhs[free_index[r]] -= it.value() * y[c];
            } else {
                triplets.emplace_back(free_index[r], free_index[c], it.value());
            }
        }
    }
    SpMat k_free(n_free, n_free);
    k_free.setFromTriplets(triplets.begin(), triplets.end());

    LinearSolver solver(k_free, LinearSolver::Kind::Spd);
    const Vec y_free = solver.solve(rhs);
    for (int i = 0; i < n_p; ++i) {
        if (!is_dirichlet[i]) {
            y[i] = y_free[free_index[i]];
        }
    }
    return y;
}

} // namespace mpcc
