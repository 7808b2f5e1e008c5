#include "mpcc/homotopy.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

#include "mpcc/ncp.hpp"
#include "mpcc/ocnc.hpp"

namespace mpcc {

namespace {

// The inner Newton method tracks stationary points, not minimizers, and for
// symmetric data (Example 3: u and v enter interchangeably) the tracked
// branch can be a saddle of the nonconvex penalized objective along which
// both controls collapse toward zero as sigma grows; the stopping test would
// then fire on a degenerate all-zero limit. Such a branch is recognisable:
// the control norm drops by an order of magnitude per penalty step while the
// reduced Hessian stays indefinite. Saddle branches that keep their scale
// converge to structured limits and are left alone.
//
// On a collapsing branch, push the controls once along the most negative
// eigenvector and re-solve at the same sigma. The kick is a few percent of
// the iterate scale: large enough that the strongly unstable part of the
// configuration tips into a complementary pattern, small enough that the
// weakly unstable part stays put, which is where the tracked branch keeps
// its biactive structure. If the landing still collapses, the norm test
// fires again at the next penalty step with a kick scaled to the new
// iterate, so a single push per step is enough.
constexpr int kEscapeMaxDim = 512;
constexpr double kKickScale = 0.022;   // vs the current control magnitude
constexpr double kCollapseTotal = 0.3; // vs the largest accepted control norm
constexpr double kCollapseStep = 0.5;  // vs the previous accepted control norm

void escape_saddle(KktIterate& x, NewtonReport& report,
                   const EllipticOperator& op, const FemMatrices& fem,
                   const ReductionMap& reduction, const PenaltyConfig& cfg,
                   double sigma, const Vec& yd) {
    const int m = reduction.reduced_dim();
    if (2 * m > kEscapeMaxDim) {
        return;
    }
    const Mat hess =
        reduced_objective_hessian(x, op, fem, reduction, cfg, sigma);
    Eigen::SelfAdjointEigenSolver<Mat> eig(hess);
    const double scale = 1.0 + hess.diagonal().cwiseAbs().maxCoeff();
    if (eig.eigenvalues()[0] >= -1e-8 * scale) {
        return;
    }
    Vec dir = eig.eigenvectors().col(0);
    int lead = 0;
    dir.cwiseAbs().maxCoeff(&lead);
    if (dir[lead] < 0.0) {
        dir = -dir;
    }
    const double eta = kKickScale * std::max(x.u.cwiseAbs().maxCoeff(),
                                             x.v.cwiseAbs().maxCoeff());
    if (eta <= 0.0) {
        return;
    }
    KktIterate kicked = x;
    kicked.u += eta * dir.segment(0, m);
    kicked.v += eta * dir.segment(m, m);
    // The walk away from a saddle can be much longer than a warm-started
    // penalty step, so it gets a larger iteration budget.
    PenaltyConfig escape_cfg = cfg;
    escape_cfg.max_newton = std::max(10 * cfg.max_newton, 500);
    auto [next, rep] =
        newton_solve(kicked, op, fem, reduction, escape_cfg, sigma, yd);
    if (!rep.converged) {
        // Keep the converged saddle iterate.
        return;
    }
    x = std::move(next);
    report = std::move(rep);
}

} // namespace

double weighted_norm(const Vec& du, const Vec& dv, const FemMatrices& fem,
                     const ReductionMap& reduction) {
    if (du.size() != reduction.reduced_dim() ||
        dv.size() != reduction.reduced_dim() ||
        reduction.full_dim() != fem.n_p) {
        throw std::invalid_argument("weighted_norm: dimension mismatch");
    }
    const Vec du_full = reduction.r * du;
    const Vec dv_full = reduction.r * dv;
    const double quad =
        du_full.dot(fem.m1 * du_full) + du_full.dot(fem.k1 * du_full) +
        dv_full.dot(fem.m1 * dv_full) + dv_full.dot(fem.k1 * dv_full);
    return std::sqrt(std::max(quad, 0.0));
}

std::pair<KktIterate, HomotopyTrace> run_homotopy(const EllipticOperator& op,
                                                  const FemMatrices& fem,
                                                  const ReductionMap& reduction,
                                                  const PenaltyConfig& cfg,
                                                  const Vec& yd) {
    cfg.validate();
    if (yd.size() != fem.n_e) {
        throw std::invalid_argument("run_homotopy: yd must have n_e entries");
    }

    HomotopyTrace trace;

    const OcncSolution init = solve_ocnc(op, fem, reduction, cfg, yd);
    trace.ocnc_converged = init.converged;

    KktIterate x;
    x.y = init.y;
    x.u = reduction.reduce(init.u);
    x.v = reduction.reduce(init.v);
    x.p = solve_adjoint(op, fem, init.y, yd);

    double sigma = cfg.sigma0;
    double sigma_prev = 0.0;
    double last_fb = 0.0;
    double norm_prev = 0.0;
    double norm_max = 0.0;
    for (int k = 1;; ++k) {
        if (sigma > cfg.sigma_max) {
            trace.hit_sigma_max = true;
            break;
        }

        auto [next, report] = newton_solve(x, op, fem, reduction, cfg, sigma, yd);
        if (!report.converged && sigma_prev > 0.0) {
            // One retry at the geometric mean of the last two parameters.
            const double sigma_retry = std::sqrt(sigma_prev * sigma);
            auto [retry_next, retry_report] =
                newton_solve(x, op, fem, reduction, cfg, sigma_retry, yd);
            if (retry_report.converged) {
                sigma = sigma_retry;
                next = std::move(retry_next);
                report = std::move(retry_report);
            }
        } else if (!report.converged) {
            // The first penalty step has no previous sigma to back off to.
            // A cold start can need far more than a warm-started step budget
            // while the iteration works its way off a degenerate
            // configuration, so continue once from where it stopped.
            PenaltyConfig long_cfg = cfg;
            long_cfg.max_newton = std::max(10 * cfg.max_newton, 500);
            auto [cont_next, cont_report] =
                newton_solve(next, op, fem, reduction, long_cfg, sigma, yd);
            if (cont_report.converged) {
                next = std::move(cont_next);
                report = std::move(cont_report);
            }
        }
        if (report.converged) {
            const double norm_now =
                weighted_norm(next.u, next.v, fem, reduction);
            if (norm_max > 0.0 && norm_now < kCollapseTotal * norm_max &&
                norm_now < kCollapseStep * norm_prev) {
                escape_saddle(next, report, op, fem, reduction, cfg, sigma, yd);
            }
            norm_prev = weighted_norm(next.u, next.v, fem, reduction);
            norm_max = std::max(norm_max, norm_prev);
        }
        if (!report.converged) {
            trace.newton_failure = true;
            HomotopyRecord record;
            record.k = k;
            record.sigma = sigma;
            record.newton = report;
            trace.records.push_back(std::move(record));
            break;
        }

        HomotopyRecord record;
        record.k = k;
        record.sigma = sigma;
        record.newton = report;
        record.control_change =
            weighted_norm(next.u - x.u, next.v - x.v, fem, reduction);
        const Vec u_full = reduction.r * next.u;
        const Vec v_full = reduction.r * next.v;
        record.penalty_value = penalty_eval(u_full, v_full, fem).value;
        record.max_abs_fb = max_abs_fb(u_full, v_full, fem);
        if (k > 1 && record.max_abs_fb > last_fb * (1.0 + 1e-12)) {
            ++trace.fb_increase_count;
        }
        last_fb = record.max_abs_fb;
        const double change = record.control_change;
        trace.records.push_back(std::move(record));

        x = std::move(next);
        if (change < cfg.eps_stop) {
            trace.converged = true;
            break;
        }
        sigma_prev = sigma;
        sigma *= cfg.sigma_factor;
    }
    return {std::move(x), std::move(trace)};
}

} // namespace mpcc
