#include "mpcc/stationarity.hpp"

#include <cmath>
#include <stdexcept>

namespace mpcc {

namespace {

enum ElementClass : int { kPlusZero, kZeroZero, kZeroPlus, kResidue };

std::vector<int> element_classes(const Vec& u, const Vec& v,
                                 const FemMatrices& fem, double tau_act) {
    if (u.size() != fem.n_p || v.size() != fem.n_p) {
        throw std::invalid_argument(
            "classify_elements: controls must have n_p entries");
    }
    if (!(tau_act > 0.0)) {
        throw std::invalid_argument("classify_elements: tau_act must be positive");
    }
    const Vec u0 = fem.e10 * u;
    const Vec v0 = fem.e10 * v;
    std::vector<int> cls(fem.n_e, kResidue);
    for (int e = 0; e < fem.n_e; ++e) {
        const bool u_zero = std::abs(u0[e]) <= tau_act;
        const bool v_zero = std::abs(v0[e]) <= tau_act;
        const bool u_pos = u0[e] > tau_act;
        const bool v_pos = v0[e] > tau_act;
        if (u_pos && v_zero) {
            cls[e] = kPlusZero;
        } else if (u_zero && v_zero) {
            cls[e] = kZeroZero;
        } else if (u_zero && v_pos) {
            cls[e] = kZeroPlus;
        }
    }
    return cls;
}

} // namespace

double default_activity_threshold(const Vec& u, const Vec& v,
                                  const FemMatrices& fem) {
    const Vec u0 = fem.e10 * u;
    const Vec v0 = fem.e10 * v;
    return 1e-6 * (1.0 + u0.lpNorm<Eigen::Infinity>() +
                   v0.lpNorm<Eigen::Infinity>());
}

IndexSets classify_elements(const Vec& u, const Vec& v, const FemMatrices& fem,
                            double tau_act) {
    const std::vector<int> cls = element_classes(u, v, fem, tau_act);
    IndexSets sets;
    for (int e = 0; e < fem.n_e; ++e) {
        switch (cls[e]) {
        case kPlusZero: sets.i_plus0.push_back(e); break;
        case kZeroZero: sets.i_00.push_back(e); break;
        case kZeroPlus: sets.i_0plus.push_back(e); break;
        default: sets.residue.push_back(e); break;
        }
    }
    return sets;
}

double compute_theta(const Vec& y, const Vec& u, const Vec& v,
                     const FemMatrices& fem, const PenaltyConfig& cfg,
                     const Vec& yd) {
    const Vec y0 = fem.e10 * y;
    double theta = y0.dot(fem.m0.cwiseProduct(y0)) -
                   y0.dot(fem.m0.cwiseProduct(yd));
    theta += cfg.alpha1 * u.dot(fem.m1 * u) + cfg.alpha2 * v.dot(fem.m1 * v);
    theta += cfg.epsilon * (u.dot(fem.k1 * u) + u.dot(fem.m1 * u) +
                            v.dot(fem.k1 * v) + v.dot(fem.m1 * v));
    return theta;
}

double sigma_for_pair(const Vec& zu, const Vec& zv, const Vec& y, const Vec& u,
                      const Vec& v, const LinearSolver& a_solver,
                      const EllipticOperator& op, const FemMatrices& fem,
                      const PenaltyConfig& cfg, const Vec& yd) {
    const Vec zy = a_solver.solve(op.b_mat * zu + op.c_mat * zv);
    const Vec zy0 = fem.e10 * zy;
    const Vec y0 = fem.e10 * y;
    double sigma = zy0.dot(fem.m0.cwiseProduct(y0)) -
                   zy0.dot(fem.m0.cwiseProduct(yd));
    sigma += cfg.alpha1 * u.dot(fem.m1 * zu) + cfg.alpha2 * v.dot(fem.m1 * zv);
    sigma += cfg.epsilon * (u.dot(fem.k1 * zu) + u.dot(fem.m1 * zu) +
                            v.dot(fem.k1 * zv) + v.dot(fem.m1 * zv));
    return sigma;
}

double sigma_for_pair(const Vec& zu, const Vec& zv, const Vec& y, const Vec& u,
                      const Vec& v, const EllipticOperator& op,
                      const FemMatrices& fem, const PenaltyConfig& cfg,
                      const Vec& yd) {
    const LinearSolver a_solver(op.a_mat, LinearSolver::Kind::Spd);
    return sigma_for_pair(zu, zv, y, u, v, a_solver, op, fem, cfg, yd);
}

StationarityReport run_stationarity_test(const Vec& y, const Vec& u,
                                         const Vec& v,
                                         const EllipticOperator& op,
                                         const FemMatrices& fem,
                                         const ReductionMap& reduction,
                                         const PenaltyConfig& cfg,
                                         const Vec& yd, double tau_act) {
    if (y.size() != fem.n_p || yd.size() != fem.n_e ||
        reduction.full_dim() != fem.n_p) {
        throw std::invalid_argument("run_stationarity_test: dimension mismatch");
    }
    const std::vector<int> cls = element_classes(u, v, fem, tau_act);

    StationarityReport report;
    report.theta = compute_theta(y, u, v, fem, cfg, yd);
    for (int c : cls) {
        if (c == kResidue) ++report.infeasible_elements;
    }

    const int m = reduction.reduced_dim();
    report.grid = m;

    // A strip may only perturb u where the pattern allows u to move: every
    // element in its support has to lie in I+0 or I00, and analogously for
    // v. The support elements are exactly the structural nonzeros of E10 R.
    const SpMat support = fem.e10 * reduction.r;
    std::vector<char> ok_u(m, 1);
    std::vector<char> ok_v(m, 1);
    for (int i = 0; i < support.outerSize(); ++i) {
        for (SpMat::InnerIterator it(support, i); it; ++it) {
            const int e = static_cast<int>(it.row());
            if (cls[e] != kPlusZero && cls[e] != kZeroZero) ok_u[i] = 0;
            if (cls[e] != kZeroPlus && cls[e] != kZeroZero) ok_v[i] = 0;
        }
    }

    // Sigma(R e_i, 0) and (0, R e_j) contract to entries of the reduced
    // gradient of the smooth objective: with w solving
    // A w = E10^T M0 (E10 y - yd), linearity of the state map gives
    // z_y^T E10^T M0 (E10 y - yd) = (B z_u + C z_v)^T w.
    const LinearSolver a_solver(op.a_mat, LinearSolver::Kind::Spd);
    const Vec misfit = fem.e10 * y - yd;
    const Vec w = a_solver.solve(fem.e10.transpose() * fem.m0.cwiseProduct(misfit));
    const Vec gu = op.b_mat * w + cfg.alpha1 * (fem.m1 * u) +
                   cfg.epsilon * (fem.m1 * u + fem.k1 * u);
    const Vec gv = op.c_mat * w + cfg.alpha2 * (fem.m1 * v) +
                   cfg.epsilon * (fem.m1 * v + fem.k1 * v);
    const Vec gu_red = reduction.r.transpose() * gu;
    const Vec gv_red = reduction.r.transpose() * gv;

    report.slot_u = Vec::Zero(m);
    report.slot_v = Vec::Zero(m);
    for (int i = 0; i < m; ++i) {
        if (ok_u[i]) {
            report.slot_u[i] = gu_red[i];
            report.feasible_u.push_back(i);
        }
        if (ok_v[i]) {
            report.slot_v[i] = gv_red[i];
            report.feasible_v.push_back(i);
        }
    }

    report.sigma_values = Vec(m * m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            report.sigma_values[i * m + j] =
                report.slot_u[i] + report.slot_v[j];
        }
    }

    const int tested = report.tested_pairs();
    report.min_sigma = report.sigma_values.minCoeff();
    report.tol = 0.01 * std::abs(report.min_sigma);
    report.classification.assign(tested, 0);
    for (int t = 0; t < tested; ++t) {
        const double s = report.sigma_values[t];
        if (s > report.tol) {
            report.classification[t] = 1;
            ++report.positive;
        } else if (s < -report.tol) {
            report.classification[t] = -1;
            ++report.negative;
        } else {
            ++report.zero;
        }
    }
    report.vacuous = report.feasible_u.empty() && report.feasible_v.empty();
    report.passed = report.vacuous ||
                    (std::abs(report.theta) <= std::sqrt(report.tol) &&
                     report.negative <= tested / 10.0);
    return report;
}

} // namespace mpcc
