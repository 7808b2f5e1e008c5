#include "mpcc/ocnc.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <stdexcept>
#include <utility>

#include "mpcc/errors.hpp"

namespace mpcc {

namespace {

struct OcncState {
    Vec y;
    Vec u; // reduced coordinates
    Vec v;
    Vec p;
};

struct OcncSystem {
    const EllipticOperator& op;
    const FemMatrices& fem;
    const ReductionMap& reduction;
    const PenaltyConfig& cfg;
    const Vec& yd;

    int n_p;
    int m;
    SpMat mobs;
    SpMat q1_full; // alpha1 M1 + eps (M1 + K)
    SpMat q2_full;
    Vec yd_rhs; // E10^T M0 yd
    Vec m_lump;  // row sums of M1
    LinearSolver a_solver;

    OcncSystem(const EllipticOperator& op_, const FemMatrices& fem_,
               const ReductionMap& reduction_, const PenaltyConfig& cfg_,
               const Vec& yd_)
        : op(op_), fem(fem_), reduction(reduction_), cfg(cfg_), yd(yd_),
          n_p(fem_.n_p), m(reduction_.reduced_dim()),
          a_solver(op_.a_mat, LinearSolver::Kind::Spd) {
        mobs = fem.e10.transpose() * SpMat(fem.m0.asDiagonal()) * fem.e10;
        const SpMat h1 = fem.m1 + fem.k1;
        q1_full = cfg.alpha1 * fem.m1 + cfg.epsilon * h1;
        q2_full = cfg.alpha2 * fem.m1 + cfg.epsilon * h1;
        yd_rhs = fem.e10.transpose() * fem.m0.cwiseProduct(yd);
        // The penalty term uses the lumped mass matrix. With the consistent
        // one the coefficientwise function u -> (1/2)|min(0,u)|_M1^2 is not
        // C1 (off-diagonal entries make the two one-sided derivatives at
        // u_i = 0 differ whenever a neighbor is active), so its minimizers
        // can sit on creases where no Newton selection residual vanishes.
        // Lumping makes the penalty diagonal and C1; the gamma -> infinity
        // limit, which is the returned object, is the same constrained
        // minimizer either way.
        m_lump = fem.m1 * Vec::Ones(n_p);
    }

    int dim() const { return 2 * n_p + 2 * m; }

    // Recomputes state and adjoint from the controls, so the linear system
    // rows of the residual vanish and the control rows equal the gradient
    // of the eliminated objective.
    void eliminate(OcncState& x) const {
        const Vec u_full = reduction.r * x.u;
        const Vec v_full = reduction.r * x.v;
        x.y = solve_state(a_solver, op, u_full, v_full);
        x.p = solve_adjoint(a_solver, fem, x.y, yd);
    }

    Vec residual(const OcncState& x, double gamma) const {
        const SpMat& r = reduction.r;
        const Vec u_full = r * x.u;
        const Vec v_full = r * x.v;
        const Vec u_neg = u_full.cwiseMin(0.0);
        const Vec v_neg = v_full.cwiseMin(0.0);

        Vec out(dim());
        out.segment(0, n_p) = mobs * x.y - yd_rhs - op.a_mat * x.p;
        Vec u_row = q1_full * u_full + op.b_mat * x.p +
                    gamma * m_lump.cwiseProduct(u_neg);
        out.segment(n_p, m) = r.transpose() * u_row;
        Vec v_row = q2_full * v_full + op.c_mat * x.p +
                    gamma * m_lump.cwiseProduct(v_neg);
        out.segment(n_p + m, m) = r.transpose() * v_row;
        out.segment(n_p + 2 * m, n_p) =
            -(op.a_mat * x.y) + op.b_mat * u_full + op.c_mat * v_full;
        return out;
    }

    // Diagonal penalty Jacobian on the active rows, conjugated by R.
    SpMat masked_mass(const Vec& full, double gamma) const {
        std::vector<Triplet> triplets;
        for (int i = 0; i < n_p; ++i) {
            if (full[i] < 0.0) {
                triplets.emplace_back(i, i, gamma * m_lump[i]);
            }
        }
        SpMat d(n_p, n_p);
        d.setFromTriplets(triplets.begin(), triplets.end());
        return SpMat(reduction.r.transpose() * d * reduction.r);
    }

    SpMat jacobian(const OcncState& x, double gamma) const {
        const SpMat& r = reduction.r;
        const Vec u_full = r * x.u;
        const Vec v_full = r * x.v;
        const SpMat q1_red = SpMat(r.transpose() * q1_full * r) +
                             masked_mass(u_full, gamma);
        const SpMat q2_red = SpMat(r.transpose() * q2_full * r) +
                             masked_mass(v_full, gamma);
        const SpMat b_full = op.b_mat * r;
        const SpMat c_full = op.c_mat * r;

        const int off_u = n_p;
        const int off_v = n_p + m;
        const int off_p = n_p + 2 * m;
        std::vector<Triplet> triplets;
        auto append = [&](const SpMat& block, int row_off, int col_off,
                          double scale) {
            for (int col = 0; col < block.outerSize(); ++col) {
                for (SpMat::InnerIterator it(block, col); it; ++it) {
                    triplets.emplace_back(static_cast<int>(it.row()) + row_off,
                                          static_cast<int>(it.col()) + col_off,
                                          scale * it.value());
                }
            }
        };
        append(mobs, 0, 0, 1.0);
        append(op.a_mat, 0, off_p, -1.0);
        append(q1_red, off_u, off_u, 1.0);
        append(SpMat(b_full.transpose()), off_u, off_p, 1.0);
        append(q2_red, off_v, off_v, 1.0);
        append(SpMat(c_full.transpose()), off_v, off_p, 1.0);
        append(op.a_mat, off_p, 0, -1.0);
        append(b_full, off_p, off_u, 1.0);
        append(c_full, off_p, off_v, 1.0);

        SpMat jac(dim(), dim());
        jac.setFromTriplets(triplets.begin(), triplets.end());
        return jac;
    }

    double objective(const OcncState& x, double gamma) const {
        const SpMat& r = reduction.r;
        const Vec u_full = r * x.u;
        const Vec v_full = r * x.v;
        const Vec misfit = fem.e10 * x.y - yd;
        const Vec u_neg = u_full.cwiseMin(0.0);
        const Vec v_neg = v_full.cwiseMin(0.0);
        double value = 0.5 * misfit.dot(fem.m0.cwiseProduct(misfit));
        value += 0.5 * cfg.alpha1 * u_full.dot(fem.m1 * u_full);
        value += 0.5 * cfg.alpha2 * v_full.dot(fem.m1 * v_full);
        value += 0.5 * cfg.epsilon *
                 (u_full.dot(fem.m1 * u_full) + u_full.dot(fem.k1 * u_full) +
                  v_full.dot(fem.m1 * v_full) + v_full.dot(fem.k1 * v_full));
        value += 0.5 * gamma *
                 (u_neg.dot(m_lump.cwiseProduct(u_neg)) +
                  v_neg.dot(m_lump.cwiseProduct(v_neg)));
        return value;
    }
};

} // namespace

OcncSolution solve_ocnc(const EllipticOperator& op, const FemMatrices& fem,
                        const ReductionMap& reduction, const PenaltyConfig& cfg,
                        const Vec& yd, const OcncOptions& options,
                        std::vector<OcncGammaRecord>* trace) {
    if (cfg.epsilon <= 0.0) {
        throw std::invalid_argument("solve_ocnc: epsilon must be positive");
    }
    if (yd.size() != fem.n_e || reduction.full_dim() != fem.n_p) {
        throw std::invalid_argument("solve_ocnc: dimension mismatch");
    }
    if (!(options.gamma0 > 0.0) || !(options.gamma_factor > 1.0) ||
        !(options.gamma_max >= options.gamma0)) {
        throw std::invalid_argument("solve_ocnc: invalid gamma schedule");
    }

    const OcncSystem sys(op, fem, reduction, cfg, yd);
    const int n_p = sys.n_p;
    const int m = sys.m;

    OcncState x{Vec::Zero(n_p), Vec::Zero(m), Vec::Zero(m), Vec::Zero(n_p)};
    sys.eliminate(x);

    std::vector<double> gammas{0.0};
    for (double g = options.gamma0; g <= options.gamma_max * (1.0 + 1e-12);
         g *= options.gamma_factor) {
        gammas.push_back(g);
    }

    bool all_converged = true;
    double last_residual = 0.0;
    for (double gamma : gammas) {
        OcncGammaRecord record;
        record.gamma = gamma;
        record.objective_start = sys.objective(x, gamma);

        // State and adjoint stay eliminated, so the control rows of the
        // residual are the gradient of the eliminated objective. That
        // objective is C1, piecewise quadratic and strongly convex, and
        // Armijo backtracking on it cannot be trapped the way a residual
        // norm can at points where the active set changes.
        Vec residual = sys.residual(x, gamma);
        double res_norm = residual.lpNorm<Eigen::Infinity>();
        bool sub_converged = res_norm <= options.tol;
        for (int iter = 0; iter < options.max_newton && !sub_converged; ++iter) {
            const SpMat jac = sys.jacobian(x, gamma);
            Eigen::SparseLU<SpMat> lu;
            lu.compute(jac);
            if (lu.info() != Eigen::Success) {
                all_converged = false;
                break;
            }
            Vec direction = lu.solve(-residual);
            direction += lu.solve(Vec(-residual - jac * direction));
            const Vec du = direction.segment(n_p, m);
            const Vec dv = direction.segment(n_p + m, m);
            const double slope = residual.segment(n_p, m).dot(du) +
                                 residual.segment(n_p + m, m).dot(dv);
            if (slope >= 0.0) break; // gradient at its numerical floor

            const double j0 = sys.objective(x, gamma);
            double t = 1.0;
            OcncState cand = x;
            bool accepted = false;
            while (t >= std::ldexp(1.0, -30)) {
                cand.u = x.u + t * du;
                cand.v = x.v + t * dv;
                sys.eliminate(cand);
                if (sys.objective(cand, gamma) <= j0 + 1e-4 * t * slope) {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) break;
            x = cand;
            ++record.newton_iterations;

            residual = sys.residual(x, gamma);
            res_norm = residual.lpNorm<Eigen::Infinity>();
            sub_converged = res_norm <= options.tol;
        }
        if (!sub_converged) all_converged = false;
        last_residual = res_norm;
        record.residual = res_norm;
        record.objective_end = sys.objective(x, gamma);
        if (trace) trace->push_back(record);
    }

    OcncSolution out;
    out.y = x.y;
    out.u = reduction.r * x.u;
    out.v = reduction.r * x.v;
    out.p = x.p;
    out.kkt_residual = last_residual;
    const Vec u_elem = fem.e10 * out.u;
    const Vec v_elem = fem.e10 * out.v;
    const bool feasible = u_elem.minCoeff() >= -options.feas_tol &&
                          v_elem.minCoeff() >= -options.feas_tol;
    out.converged = all_converged && feasible && last_residual <= options.tol;
    return out;
}

OcncSolution solve_ocnc(const EllipticOperator& op, const FemMatrices& fem,
                        const ReductionMap& reduction, const PenaltyConfig& cfg,
                        const Vec& yd) {
    return solve_ocnc(op, fem, reduction, cfg, yd, OcncOptions{}, nullptr);
}

} // namespace mpcc
