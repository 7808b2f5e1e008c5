#include "mpcc/kkt.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <stdexcept>

namespace mpcc {

namespace {

void append_block(std::vector<Triplet>& triplets, const SpMat& block,
                  int row_offset, int col_offset, double scale = 1.0) {
    for (int col = 0; col < block.outerSize(); ++col) {
        for (SpMat::InnerIterator it(block, col); it; ++it) {
            triplets.emplace_back(static_cast<int>(it.row()) + row_offset,
                                  static_cast<int>(it.col()) + col_offset,
                                  scale * it.value());
        }
    }
}

/// Constant blocks of the optimality system for fixed operator, mesh and
/// regularization; only the penalty blocks change along the Newton path.
struct SystemBlocks {
    int n_p;
    int m;
    SpMat mobs;   // E10^T M0(1) E10
    SpMat q1_red; // R^T [alpha1 M1 + eps (M1 + K)] R
    SpMat q2_red;
    SpMat b_red;  // R^T M1(b)
    SpMat c_red;  // R^T M1(c)
    SpMat b_full; // M1(b) R
    SpMat c_full; // M1(c) R
    const SpMat* a;
    LinearSolver a_solver;

    SystemBlocks(const EllipticOperator& op, const FemMatrices& fem,
                 const ReductionMap& reduction, const PenaltyConfig& cfg)
        : n_p(fem.n_p), m(reduction.reduced_dim()), a(&op.a_mat),
          a_solver(op.a_mat, LinearSolver::Kind::Spd) {
        const SpMat& r = reduction.r;
        mobs = fem.e10.transpose() * SpMat(fem.m0.asDiagonal()) * fem.e10;
        const SpMat h1 = fem.m1 + fem.k1;
        q1_red = r.transpose() * SpMat(cfg.alpha1 * fem.m1 + cfg.epsilon * h1) * r;
        q2_red = r.transpose() * SpMat(cfg.alpha2 * fem.m1 + cfg.epsilon * h1) * r;
        b_full = op.b_mat * r;
        c_full = op.c_mat * r;
        b_red = SpMat(b_full.transpose());
        c_red = SpMat(c_full.transpose());
    }

    int dim() const { return 2 * n_p + 2 * m; }

    SpMat assemble(double sigma, const PenaltyHessian& h,
                   const ReductionMap& reduction) const {
        const SpMat& r = reduction.r;
        const SpMat huu = r.transpose() * h.huu * r;
        const SpMat huv = r.transpose() * h.huv * r;
        const SpMat hvv = r.transpose() * h.hvv * r;

        const int off_u = n_p;
        const int off_v = n_p + m;
        const int off_p = n_p + 2 * m;

        std::vector<Triplet> triplets;
        triplets.reserve(static_cast<std::size_t>(
            mobs.nonZeros() + 2 * a->nonZeros() + q1_red.nonZeros() +
            q2_red.nonZeros() + huu.nonZeros() + 2 * huv.nonZeros() +
            hvv.nonZeros() + 2 * (b_red.nonZeros() + c_red.nonZeros())));

        append_block(triplets, mobs, 0, 0);
        append_block(triplets, *a, 0, off_p, -1.0);
        append_block(triplets, q1_red, off_u, off_u);
        append_block(triplets, huu, off_u, off_u, sigma);
        append_block(triplets, huv, off_u, off_v, sigma);
        append_block(triplets, b_red, off_u, off_p);
        append_block(triplets, huv, off_v, off_u, sigma);
        append_block(triplets, q2_red, off_v, off_v);
        append_block(triplets, hvv, off_v, off_v, sigma);
        append_block(triplets, c_red, off_v, off_p);
        append_block(triplets, *a, off_p, 0, -1.0);
        append_block(triplets, b_full, off_p, off_u);
        append_block(triplets, c_full, off_p, off_v);

        SpMat jac(dim(), dim());
        jac.setFromTriplets(triplets.begin(), triplets.end());
        return jac;
    }
};

void check_dimensions(const KktIterate& it, const FemMatrices& fem,
                      const ReductionMap& reduction, double sigma,
                      const Vec& yd) {
    if (sigma < 0.0) {
        throw std::invalid_argument("kkt: sigma must be nonnegative");
    }
    const int m = reduction.reduced_dim();
    if (it.y.size() != fem.n_p || it.p.size() != fem.n_p ||
        it.u.size() != m || it.v.size() != m || yd.size() != fem.n_e ||
        reduction.full_dim() != fem.n_p) {
        throw std::invalid_argument("kkt: iterate dimension mismatch");
    }
}

Vec residual_impl(const KktIterate& it, const EllipticOperator& op,
                  const FemMatrices& fem, const ReductionMap& reduction,
                  const PenaltyConfig& cfg, double sigma, const Vec& yd) {
    const int n_p = fem.n_p;
    const int m = reduction.reduced_dim();
    const SpMat& r = reduction.r;

    const Vec u_full = r * it.u;
    const Vec v_full = r * it.v;

    const Vec observation = fem.e10 * it.y - yd;
    const Vec adjoint_row =
        fem.e10.transpose() * fem.m0.cwiseProduct(observation) -
        op.a_mat * it.p;

    const PenaltyEval penalty = penalty_eval(u_full, v_full, fem);
    const Vec h1u = fem.m1 * u_full + fem.k1 * u_full;
    const Vec h1v = fem.m1 * v_full + fem.k1 * v_full;

    const Vec u_row = r.transpose() *
                      Vec(cfg.alpha1 * (fem.m1 * u_full) + cfg.epsilon * h1u +
                          sigma * penalty.grad_u + op.b_mat * it.p);
    const Vec v_row = r.transpose() *
                      Vec(cfg.alpha2 * (fem.m1 * v_full) + cfg.epsilon * h1v +
                          sigma * penalty.grad_v + op.c_mat * it.p);

    const Vec state_row = -(op.a_mat * it.y) + op.b_mat * u_full + op.c_mat * v_full;

    Vec out(2 * n_p + 2 * m);
    out.segment(0, n_p) = adjoint_row;
    out.segment(n_p, m) = u_row;
    out.segment(n_p + m, m) = v_row;
    out.segment(n_p + 2 * m, n_p) = state_row;
    return out;
}

} // namespace

Vec kkt_residual(const KktIterate& it, const EllipticOperator& op,
                 const FemMatrices& fem, const ReductionMap& reduction,
                 const PenaltyConfig& cfg, double sigma, const Vec& yd) {
    check_dimensions(it, fem, reduction, sigma, yd);
    return residual_impl(it, op, fem, reduction, cfg, sigma, yd);
}

SpMat kkt_jacobian(const KktIterate& it, const EllipticOperator& op,
                   const FemMatrices& fem, const ReductionMap& reduction,
                   const PenaltyConfig& cfg, double sigma) {
    if (sigma < 0.0) {
        throw std::invalid_argument("kkt_jacobian: sigma must be nonnegative");
    }
    const SystemBlocks blocks(op, fem, reduction, cfg);
    const Vec u_full = reduction.r * it.u;
    const Vec v_full = reduction.r * it.v;
    const PenaltyHessian h = penalty_newton_matrix(u_full, v_full, fem);
    return blocks.assemble(sigma, h, reduction);
}

Mat reduced_objective_hessian(const KktIterate& it, const EllipticOperator& op,
                              const FemMatrices& fem,
                              const ReductionMap& reduction,
                              const PenaltyConfig& cfg, double sigma) {
    if (sigma < 0.0) {
        throw std::invalid_argument(
            "reduced_objective_hessian: sigma must be nonnegative");
    }
    const SystemBlocks blocks(op, fem, reduction, cfg);
    const int m = blocks.m;

    const Vec u_full = reduction.r * it.u;
    const Vec v_full = reduction.r * it.v;
    const PenaltyHessian h = penalty_newton_matrix(u_full, v_full, fem);
    const SpMat& r = reduction.r;

    Mat hess(2 * m, 2 * m);
    hess.topLeftCorner(m, m) =
        Mat(blocks.q1_red) + sigma * Mat(r.transpose() * h.huu * r);
    hess.topRightCorner(m, m) = sigma * Mat(r.transpose() * h.huv * r);
    hess.bottomLeftCorner(m, m) = hess.topRightCorner(m, m).transpose();
    hess.bottomRightCorner(m, m) =
        Mat(blocks.q2_red) + sigma * Mat(r.transpose() * h.hvv * r);

    // Observation term through the state map: columns of A^{-1} B R and
    // A^{-1} C R, contracted against M_obs.
    Mat sb(fem.n_p, m);
    Mat sc(fem.n_p, m);
    for (int j = 0; j < m; ++j) {
        sb.col(j) = blocks.a_solver.solve(Vec(blocks.b_full.col(j)));
        sc.col(j) = blocks.a_solver.solve(Vec(blocks.c_full.col(j)));
    }
    const Mat mb = blocks.mobs * sb;
    const Mat mc = blocks.mobs * sc;
    hess.topLeftCorner(m, m) += sb.transpose() * mb;
    hess.topRightCorner(m, m) += sb.transpose() * mc;
    hess.bottomLeftCorner(m, m) += sc.transpose() * mb;
    hess.bottomRightCorner(m, m) += sc.transpose() * mc;
    return hess;
}

std::pair<KktIterate, NewtonReport> newton_solve(
    const KktIterate& start, const EllipticOperator& op, const FemMatrices& fem,
    const ReductionMap& reduction, const PenaltyConfig& cfg, double sigma,
    const Vec& yd) {
    check_dimensions(start, fem, reduction, sigma, yd);

    constexpr double armijo_slope = 1e-4;
    constexpr double step_min = 1.0 / (1 << 30);
    constexpr double regularization = 1e-10;

    const SystemBlocks blocks(op, fem, reduction, cfg);

    KktIterate x = start;
    NewtonReport report;
    Vec residual = residual_impl(x, op, fem, reduction, cfg, sigma, yd);
    report.final_residual = residual.lpNorm<Eigen::Infinity>();
    report.residual_history.push_back(residual.norm());
    if (report.final_residual <= cfg.newton_tol) {
        report.converged = true;
        return {x, report};
    }

    const int n_p = fem.n_p;
    const int m = reduction.reduced_dim();

    // y and p are kept eliminated through the linear rows, so the control
    // rows of the residual are the exact gradient of the reduced penalized
    // objective. The line search descends on that objective: it is C^1
    // (the squared Fischer-Burmeister function is continuously
    // differentiable), so it cannot trap the iteration at a kink the way a
    // residual-norm merit does near biactive elements.
    auto eliminate = [&](KktIterate& it) {
        const Vec u_full = reduction.r * it.u;
        const Vec v_full = reduction.r * it.v;
        it.y = solve_state(blocks.a_solver, op, u_full, v_full);
        it.p = solve_adjoint(blocks.a_solver, fem, it.y, yd);
    };
    auto objective = [&](const KktIterate& it) {
        const Vec u_full = reduction.r * it.u;
        const Vec v_full = reduction.r * it.v;
        const Vec misfit = fem.e10 * it.y - yd;
        return 0.5 * misfit.dot(fem.m0.cwiseProduct(misfit)) +
               0.5 * it.u.dot(blocks.q1_red * it.u) +
               0.5 * it.v.dot(blocks.q2_red * it.v) +
               sigma * penalty_eval(u_full, v_full, fem).value;
    };

    eliminate(x);
    residual = residual_impl(x, op, fem, reduction, cfg, sigma, yd);
    report.final_residual = residual.lpNorm<Eigen::Infinity>();
    if (report.final_residual <= cfg.newton_tol) {
        report.converged = true;
        return {x, report};
    }
    report.objective_history.push_back(objective(x));

    SpMat control_identity(blocks.dim(), blocks.dim());
    {
        std::vector<Triplet> ones;
        ones.reserve(2 * m);
        for (int i = 0; i < 2 * m; ++i) {
            ones.emplace_back(n_p + i, n_p + i, 1.0);
        }
        control_identity.setFromTriplets(ones.begin(), ones.end());
    }

    for (int iter = 0; iter < cfg.max_newton; ++iter) {
        const Vec u_full = reduction.r * x.u;
        const Vec v_full = reduction.r * x.v;
        const PenaltyHessian h = penalty_newton_matrix(u_full, v_full, fem);
        SpMat jac = blocks.assemble(sigma, h, reduction);

        Eigen::SparseLU<SpMat> lu;
        lu.compute(jac);
        if (lu.info() != Eigen::Success) {
            SpMat identity(blocks.dim(), blocks.dim());
            identity.setIdentity();
            jac += regularization * identity;
            lu.compute(jac);
            report.regularized = true;
            if (lu.info() != Eigen::Success) {
                break;
            }
        }

        Vec direction = lu.solve(-residual);
        direction += lu.solve(Vec(-residual - jac * direction));

        Vec du = direction.segment(n_p, m);
        Vec dv = direction.segment(n_p + m, m);
        const Vec gu = residual.segment(n_p, m);
        const Vec gv = residual.segment(n_p + m, m);
        double slope = gu.dot(du) + gv.dot(dv);
        if (slope >= 0.0) {
            // The penalty is nonconvex, so the Newton matrix selection can
            // lose descent. Shift the control block until it does descend;
            // the shifted direction keeps the curvature information of the
            // stable subspace, unlike a raw gradient step.
            double diag_scale = 0.0;
            for (int i = 0; i < 2 * m; ++i) {
                diag_scale = std::max(diag_scale,
                                      std::abs(jac.coeff(n_p + i, n_p + i)));
            }
            if (diag_scale == 0.0) {
                diag_scale = 1.0;
            }
            for (double tau = 1e-8 * diag_scale; tau <= 1e8 * diag_scale;
                 tau *= 100.0) {
                SpMat shifted = jac + tau * control_identity;
                Eigen::SparseLU<SpMat> lu_tau;
                lu_tau.compute(shifted);
                if (lu_tau.info() != Eigen::Success) {
                    continue;
                }
                direction = lu_tau.solve(-residual);
                du = direction.segment(n_p, m);
                dv = direction.segment(n_p + m, m);
                slope = gu.dot(du) + gv.dot(dv);
                if (slope < 0.0) {
                    break;
                }
            }
            if (slope >= 0.0) {
                du = -gu;
                dv = -gv;
                slope = -(gu.squaredNorm() + gv.squaredNorm());
                if (slope == 0.0) {
                    break;
                }
            }
        }

        const double j0 = objective(x);
        double t = 1.0;
        int halvings = 0;
        KktIterate candidate;
        bool accepted = false;
        bool endgame = false;
        while (t >= step_min) {
            candidate = x;
            candidate.u += t * du;
            candidate.v += t * dv;
            eliminate(candidate);
            if (objective(candidate) <= j0 + armijo_slope * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
            ++halvings;
        }
        if (!accepted) {
            // Near stationarity the objective decrease falls below what
            // floating point can resolve and the Armijo test turns into
            // noise. Switch to the local phase: take the undamped step if it
            // still reduces the residual decisively.
            candidate = x;
            candidate.u += du;
            candidate.v += dv;
            eliminate(candidate);
            const Vec r_try =
                residual_impl(candidate, op, fem, reduction, cfg, sigma, yd);
            if (r_try.lpNorm<Eigen::Infinity>() <=
                0.9 * residual.lpNorm<Eigen::Infinity>()) {
                halvings = 0;
                accepted = true;
                endgame = true;
            }
        }
        if (!accepted) {
            break; // line search failed; report non-convergence
        }

        x = std::move(candidate);
        residual = residual_impl(x, op, fem, reduction, cfg, sigma, yd);
        ++report.iterations;
        report.residual_history.push_back(residual.norm());
        report.objective_history.push_back(objective(x));
        if (endgame) {
            report.endgame_iterations.push_back(report.iterations);
        }
        if (static_cast<int>(report.damping_histogram.size()) <= halvings) {
            report.damping_histogram.resize(halvings + 1, 0);
        }
        ++report.damping_histogram[halvings];

        report.final_residual = residual.lpNorm<Eigen::Infinity>();
        if (report.final_residual <= cfg.newton_tol) {
            report.converged = true;
            break;
        }
    }
    return {x, report};
}

} // namespace mpcc
