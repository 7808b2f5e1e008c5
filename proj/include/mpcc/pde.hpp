#pragma once

#include <functional>
#include <memory>

#include "mpcc/fem.hpp"
#include "mpcc/linalg.hpp"
#include "mpcc/mesh.hpp"

namespace mpcc {

/// Discrete elliptic operator A = M1(a) + K(C) together with the control
/// couplings B = M1(b) and C = M1(c). All blocks are symmetric; A is SPD
/// for nonnegative a not identically zero.
struct EllipticOperator {
    SpMat a_mat;
    SpMat b_mat;
    SpMat c_mat;
};

/// Assembles the operator from elementwise coefficients. diffusion is one
/// SPD matrix per element (pass a single matrix for a uniform coefficient).
EllipticOperator assemble_elliptic_operator(const Mesh& mesh, const Vec& a_coef,
                                            std::span<const Mat2> diffusion,
                                            const Vec& b_coef, const Vec& c_coef);
EllipticOperator assemble_elliptic_operator(const Mesh& mesh, const Vec& a_coef,
                                            const Mat2& diffusion,
                                            const Vec& b_coef, const Vec& c_coef);

/// Direct sparse factorization of a fixed matrix, reusable across solves.
/// One step of iterative refinement is applied and the residual checked
/// against 1e-10 * (1 + |rhs|); a violation raises SolverError.
class LinearSolver {
public:
    enum class Kind { Spd, SymmetricIndefinite };

    LinearSolver(const SpMat& matrix, Kind kind);
    ~LinearSolver();
    LinearSolver(LinearSolver&&) noexcept;
    LinearSolver& operator=(LinearSolver&&) noexcept;

    Vec solve(const Vec& rhs) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Solves A y = B u + C v.
Vec solve_state(const EllipticOperator& op, const Vec& u, const Vec& v);
Vec solve_state(const LinearSolver& a_solver, const EllipticOperator& op,
                const Vec& u, const Vec& v);

/// Solves A p = E10^T M0(1) (E10 y - yd).
Vec solve_adjoint(const EllipticOperator& op, const FemMatrices& fem,
                  const Vec& y, const Vec& yd);
Vec solve_adjoint(const LinearSolver& a_solver, const FemMatrices& fem,
                  const Vec& y, const Vec& yd);

/// Solves -Laplace y = 0 on the unit square with Dirichlet data g1 on the
/// bottom edge, g2 on the top edge and homogeneous Neumann conditions on
/// the two vertical sides. Both boundary functions take x1.
Vec solve_dirichlet_laplace(const Mesh& mesh,
                            const std::function<double(double)>& g1,
                            const std::function<double(double)>& g2);

} // namespace mpcc
