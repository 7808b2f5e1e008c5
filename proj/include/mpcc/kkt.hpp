#pragma once

#include <utility>
#include <vector>

#include "mpcc/config.hpp"
#include "mpcc/fem.hpp"
#include "mpcc/linalg.hpp"
#include "mpcc/ncp.hpp"
#include "mpcc/pde.hpp"

namespace mpcc {

/// One point of the coupled optimality system. State y and adjoint p are
/// nodal; the controls live in the reduced coordinates of the active
/// ReductionMap (full nodal coordinates under the identity map).
struct KktIterate {
    Vec y;
    Vec u;
    Vec v;
    Vec p;
};

struct NewtonReport {
    int iterations = 0;
    double final_residual = 0.0; // max-norm, the stopping quantity
    bool converged = false;
    bool regularized = false;
    // damping_histogram[h] counts iterations whose accepted step used h
    // halvings of the unit step.
    std::vector<int> damping_histogram;
    // Euclidean residual norms after each accepted step; entry 0 belongs
    // to the starting point.
    std::vector<double> residual_history;
    // Line-search merit (the penalized objective) at the same points.
    std::vector<double> objective_history;
    // Iteration indices whose step was accepted by the residual-reduction
    // endgame rule instead of the Armijo test on the objective.
    std::vector<int> endgame_iterations;
};

/// Residual of the four-block optimality system at penalty weight sigma,
/// stacked as (adjoint row, u row, v row, state row). Control rows are the
/// first-order conditions of the reduced problem, i.e. premultiplied by R^T.
Vec kkt_residual(const KktIterate& it, const EllipticOperator& op,
                 const FemMatrices& fem, const ReductionMap& reduction,
                 const PenaltyConfig& cfg, double sigma, const Vec& yd);

/// Generalized Jacobian of kkt_residual in the same block ordering; the
/// penalty contribution uses the Clarke element that vanishes on biactive
/// elements. Symmetric.
SpMat kkt_jacobian(const KktIterate& it, const EllipticOperator& op,
                   const FemMatrices& fem, const ReductionMap& reduction,
                   const PenaltyConfig& cfg, double sigma);

/// Damped semismooth Newton iteration on the optimality system. Directions
/// come from the four-block Jacobian; y and p are kept eliminated through the
/// linear rows and the step length is found by Armijo backtracking on the
/// reduced penalized objective, which is C^1 even across biactive elements.
std::pair<KktIterate, NewtonReport> newton_solve(
    const KktIterate& start, const EllipticOperator& op, const FemMatrices& fem,
    const ReductionMap& reduction, const PenaltyConfig& cfg, double sigma,
    const Vec& yd);

/// Dense Hessian of the reduced penalized objective with respect to the
/// control coordinates (u, v), i.e. the Schur complement of the four-block
/// Newton matrix onto the control rows. Costs 2m elliptic solves; meant for
/// the small reduced dimensions of the gradient-constrained setting.
Mat reduced_objective_hessian(const KktIterate& it, const EllipticOperator& op,
                              const FemMatrices& fem,
                              const ReductionMap& reduction,
                              const PenaltyConfig& cfg, double sigma);

} // namespace mpcc
