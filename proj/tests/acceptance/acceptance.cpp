// Acceptance gate: runs every primary criterion and prints one line per
// criterion. Exits nonzero if any of them fail.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "mpcc/experiments.hpp"
#include "mpcc/fem.hpp"
#include "mpcc/homotopy.hpp"
#include "mpcc/kkt.hpp"
#include "mpcc/mesh.hpp"
#include "mpcc/ncp.hpp"
#include "mpcc/ocnc.hpp"
#include "mpcc/pde.hpp"
#include "mpcc/stationarity.hpp"

using namespace mpcc;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL", id,
                name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, ...) {
    va_list args;
    va_start(args, format);
    char buffer[256];
    std::vsnprintf(buffer, sizeof(buffer), format, args);
    va_end(args);
    return buffer;
}

Vec random_vec(std::mt19937& rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Vec out(n);
    for (int i = 0; i < n; ++i) out[i] = dist(rng);
    return out;
}

// Draw nodal controls whose element projections stay away from the
// biactive point, so finite differences see a smooth penalty.
std::pair<Vec, Vec> random_nonbiactive(std::mt19937& rng,
                                       const FemMatrices& fem) {
    while (true) {
        const Vec u = random_vec(rng, fem.n_p, -1.0, 1.0);
        const Vec v = random_vec(rng, fem.n_p, -1.0, 1.0);
        const Vec u0 = fem.e10 * u;
        const Vec v0 = fem.e10 * v;
        double radius = 1e300;
        for (int e = 0; e < fem.n_e; ++e) {
            radius = std::min(radius, std::hypot(u0[e], v0[e]));
        }
        if (radius > 0.05) return {u, v};
    }
}

void criterion_1_fb_grid() {
    const auto start = Clock::now();
    bool ok = true;
    for (int i = 0; i <= 100 && ok; ++i) {
        for (int j = 0; j <= 100 && ok; ++j) {
            const double a = -2.0 + 4.0 * i / 100.0;
            const double b = -2.0 + 4.0 * j / 100.0;
            const double value = fb(a, b);
            const bool complementary = a >= 0.0 && b >= 0.0 && a * b == 0.0;
            if (complementary && value != 0.0) ok = false;
            if (!complementary && std::abs(value) <= 0.0) ok = false;
            if (fb_smoothed(a, b, 0.0) != value) ok = false;
        }
    }
    const double elapsed = seconds_since(start);
    ok = ok && elapsed < 1.0;
    report(1, "Fischer-Burmeister zero set on the [-2,2]^2 grid", ok,
           fmt("%.2f s", elapsed));
}

void criterion_2_penalty_gradient() {
    const auto start = Clock::now();
    const Mesh mesh = build_structured_mesh(4);
    const FemMatrices fem = assemble_fem_matrices(mesh);
    std::mt19937 rng(2024);
    double worst = 0.0;
    const double h = 1e-6;
    for (int point = 0; point < 100; ++point) {
        const auto [u, v] = random_nonbiactive(rng, fem);
        const PenaltyEval eval = penalty_eval(u, v, fem);
        Vec fd_u(fem.n_p);
        Vec fd_v(fem.n_p);
        for (int i = 0; i < fem.n_p; ++i) {
            Vec up = u, um = u;
            up[i] += h;
            um[i] -= h;
            fd_u[i] = (penalty_eval(up, v, fem).value -
                       penalty_eval(um, v, fem).value) /
                      (2.0 * h);
            Vec vp = v, vm = v;
            vp[i] += h;
            vm[i] -= h;
            fd_v[i] = (penalty_eval(u, vp, fem).value -
                       penalty_eval(u, vm, fem).value) /
                      (2.0 * h);
        }
        const double scale = fd_u.norm() + fd_v.norm() + 1e-12;
        worst = std::max(worst, (eval.grad_u - fd_u).norm() / scale);
        worst = std::max(worst, (eval.grad_v - fd_v).norm() / scale);
    }
    const double elapsed = seconds_since(start);
    report(2, "penalty gradient against central differences",
           worst <= 1e-6 && elapsed < 10.0,
           fmt("max rel err %.2e, %.2f s", worst, elapsed));
}

void criterion_3_newton_matrix() {
    const Mesh mesh = build_structured_mesh(4);
    const FemMatrices fem = assemble_fem_matrices(mesh);
    std::mt19937 rng(4096);
    double worst = 0.0;
    const double h = 1e-6;
    for (int point = 0; point < 50; ++point) {
        const auto [u, v] = random_nonbiactive(rng, fem);
        const PenaltyHessian hess = penalty_newton_matrix(u, v, fem);
        const Vec du = random_vec(rng, fem.n_p, -1.0, 1.0);
        const Vec dv = random_vec(rng, fem.n_p, -1.0, 1.0);
        const PenaltyEval plus = penalty_eval(u + h * du, v + h * dv, fem);
        const PenaltyEval minus = penalty_eval(u - h * du, v - h * dv, fem);
        const Vec fd_u = (plus.grad_u - minus.grad_u) / (2.0 * h);
        const Vec fd_v = (plus.grad_v - minus.grad_v) / (2.0 * h);
        const Vec an_u = hess.huu * du + hess.huv * dv;
        const Vec an_v = hess.huv * du + hess.hvv * dv;
        const double scale = fd_u.norm() + fd_v.norm() + 1e-12;
        worst = std::max(worst, (an_u - fd_u).norm() / scale);
        worst = std::max(worst, (an_v - fd_v).norm() / scale);
    }
    report(3, "Clarke Newton matrix against gradient differences",
           worst <= 1e-5, fmt("max rel err %.2e", worst));
}

void criterion_4_pde_convergence() {
    const auto start = Clock::now();
    const auto error_for = [](int nx) {
        const Mesh mesh = build_structured_mesh(nx);
        const FemMatrices fem = assemble_fem_matrices(mesh);
        const EllipticOperator op = assemble_elliptic_operator(
            mesh, Vec::Ones(fem.n_e), Mat2::Identity(), Vec::Ones(fem.n_e),
            Vec::Ones(fem.n_e));
        Vec f(fem.n_p);
        Vec exact(fem.n_p);
        for (int i = 0; i < fem.n_p; ++i) {
            const double x1 = mesh.vertices[i][0];
            const double x2 = mesh.vertices[i][1];
            exact[i] = std::cos(M_PI * x1) * std::cos(M_PI * x2);
            f[i] = (1.0 + 2.0 * M_PI * M_PI) * exact[i];
        }
        const Vec y = solve_state(op, f, Vec::Zero(fem.n_p));
        const Vec err = y - exact;
        return std::sqrt(err.dot(fem.m1 * err));
    };
    const double e16 = error_for(16);
    const double e32 = error_for(32);
    const double ratio = e16 / e32;
    const double elapsed = seconds_since(start);
    report(4, "second-order convergence of the manufactured solution",
           ratio >= 3.5 && ratio <= 4.5 && elapsed < 30.0,
           fmt("ratio %.3f, %.2f s", ratio, elapsed));
}

void criterion_5_kkt_residual() {
    const Mesh mesh = build_structured_mesh(2);
    const FemMatrices fem = assemble_fem_matrices(mesh);
    const ReductionMap reduction = assemble_reduction(mesh);
    Vec b(fem.n_e), c(fem.n_e);
    for (int e = 0; e < fem.n_e; ++e) {
        const auto centroid = mesh.centroid(e);
        b[e] = centroid[1] < 0.25 ? 1.0 : 0.0;
        c[e] = centroid[1] > 0.75 ? 1.0 : 0.0;
    }
    const EllipticOperator op = assemble_elliptic_operator(
        mesh, Vec::Ones(fem.n_e), Mat2::Identity(), b, c);
    const Vec yd = Vec::Constant(fem.n_e, 1.5);

    PenaltyConfig cfg;
    cfg.alpha1 = 0.3;
    cfg.alpha2 = 0.1;
    cfg.epsilon = 1e-3;
    const double sigma = 2.0;
    const int m = reduction.reduced_dim();

    const auto reduced_objective = [&](const Vec& u_red, const Vec& v_red) {
        const Vec u = reduction.r * u_red;
        const Vec v = reduction.r * v_red;
        const Vec y = solve_state(op, u, v);
        const Vec misfit = fem.e10 * y - yd;
        double value = 0.5 * misfit.dot(fem.m0.cwiseProduct(misfit));
        value += 0.5 * cfg.alpha1 * u.dot(fem.m1 * u);
        value += 0.5 * cfg.alpha2 * v.dot(fem.m1 * v);
        value += 0.5 * cfg.epsilon *
                 (u.dot(fem.m1 * u) + u.dot(fem.k1 * u) + v.dot(fem.m1 * v) +
                  v.dot(fem.k1 * v));
        value += sigma * penalty_eval(u, v, fem).value;
        return value;
    };

    std::mt19937 rng(555);
    double worst = 0.0;
    const double h = 1e-5;
    for (int iterate = 0; iterate < 20; ++iterate) {
        const Vec u_red = random_vec(rng, m, 0.1, 1.0);
        const Vec v_red = random_vec(rng, m, 0.1, 1.0);
        const Vec u = reduction.r * u_red;
        const Vec v = reduction.r * v_red;
        const Vec y = solve_state(op, u, v);
        const Vec p = solve_adjoint(op, fem, y, yd);
        const KktIterate it{y, u_red, v_red, p};
        const Vec r = kkt_residual(it, op, fem, reduction, cfg, sigma, yd);
        for (int i = 0; i < m; ++i) {
            Vec up = u_red, um = u_red;
            up[i] += h;
            um[i] -= h;
            const double fd =
                (reduced_objective(up, v_red) - reduced_objective(um, v_red)) /
                (2.0 * h);
            worst = std::max(worst, std::abs(r[fem.n_p + i] - fd) /
                                        (1.0 + std::abs(fd)));
            Vec vp = v_red, vm = v_red;
            vp[i] += h;
            vm[i] -= h;
            const double fdv =
                (reduced_objective(u_red, vp) - reduced_objective(u_red, vm)) /
                (2.0 * h);
            worst = std::max(worst, std::abs(r[fem.n_p + m + i] - fdv) /
                                        (1.0 + std::abs(fdv)));
        }
    }
    report(5, "optimality residual equals the reduced gradient",
           worst <= 1e-8, fmt("max rel err %.2e", worst));
}

void criterion_6_ocnc_oracle() {
    ExperimentSpec spec;
    spec.example_id = 3;
    spec.nx = 8;
    ExperimentSetup s = build_example(spec);
    const Vec ones = Vec::Ones(s.fem.n_p);
    s.yd = s.fem.e10 * solve_state(s.op, ones, ones);

    PenaltyConfig cfg;
    cfg.epsilon = 1e-4; // keeps the dense oracle well conditioned
    const Mat r = Mat(s.reduction.r);
    const Mat e10 = Mat(s.fem.e10);
    const Mat m1 = Mat(s.fem.m1);
    const Mat k1 = Mat(s.fem.k1);
    const Mat a = Mat(s.op.a_mat);
    const Mat br = Mat(s.op.b_mat) * r;
    const Mat cr = Mat(s.op.c_mat) * r;
    const Mat mobs = e10.transpose() * Mat(s.fem.m0.asDiagonal()) * e10;
    const Mat q = r.transpose() * (cfg.epsilon * (m1 + k1)) * r;

    const int n = s.fem.n_p;
    const int m = s.reduction.reduced_dim();
    Mat kkt = Mat::Zero(2 * n + 2 * m, 2 * n + 2 * m);
    kkt.block(0, 0, n, n) = mobs;
    kkt.block(0, n + 2 * m, n, n) = -a;
    kkt.block(n, n, m, m) = q;
    kkt.block(n, n + 2 * m, m, n) = br.transpose();
    kkt.block(n + m, n + m, m, m) = q;
    kkt.block(n + m, n + 2 * m, m, n) = cr.transpose();
    kkt.block(n + 2 * m, 0, n, n) = -a;
    kkt.block(n + 2 * m, n, n, m) = br;
    kkt.block(n + 2 * m, n + m, n, m) = cr;
    Vec rhs = Vec::Zero(2 * n + 2 * m);
    rhs.segment(0, n) = e10.transpose() * (s.fem.m0.asDiagonal() * s.yd);
    const Vec x = kkt.partialPivLu().solve(rhs);
    const Vec u_oracle = r * x.segment(n, m);
    const Vec v_oracle = r * x.segment(n + m, m);

    const bool oracle_feasible =
        u_oracle.minCoeff() >= 0.0 && v_oracle.minCoeff() >= 0.0;
    const OcncSolution sol = solve_ocnc(s.op, s.fem, s.reduction, cfg, s.yd);
    const double diff =
        std::max((sol.u - u_oracle).cwiseAbs().maxCoeff(),
                 (sol.v - v_oracle).cwiseAbs().maxCoeff());
    report(6, "convex initializer against the equality oracle",
           oracle_feasible && sol.converged && diff <= 1e-6,
           fmt("max diff %.2e", diff));
}

void criterion_7_feasibility() {
    const auto start = Clock::now();
    ExperimentSpec spec;
    spec.example_id = 3;
    spec.nx = 20;
    spec.cfg.sigma_max = 1e10;
    const ExperimentSetup s = build_example(spec);
    const auto [sol, trace] =
        run_homotopy(s.op, s.fem, s.reduction, spec.cfg, s.yd);
    const Vec u_full = s.reduction.r * sol.u;
    const Vec v_full = s.reduction.r * sol.v;
    const double comp = max_abs_fb(u_full, v_full, s.fem);
    const double elapsed = seconds_since(start);
    report(7, "complementarity decay on the third example", comp <= 1e-4 &&
               elapsed < 120.0,
           fmt("max |fb| %.2e, %.2f s", comp, elapsed));
}

struct VerdictRun {
    ExperimentSetup setup;
    ExperimentResult result;
};

void criteria_8_to_11_table() {
    const auto start = Clock::now();
    std::vector<VerdictRun> runs;
    for (int example = 1; example <= 3; ++example) {
        ExperimentSpec spec;
        spec.example_id = example;
        spec.nx = 40;
        VerdictRun run;
        run.setup = build_example(spec);
        run.result = run_experiment(spec);
        runs.push_back(std::move(run));
    }
    const double elapsed = seconds_since(start);

    // 8: Table verdicts with negative-pair fractions in band.
    {
        const char* expected[] = {"passed", "passed", "failed"};
        const double lo[] = {2.0, 1.0, 12.0};
        const double hi[] = {15.0, 12.0, 35.0};
        bool ok = elapsed < 600.0;
        std::string detail;
        for (int i = 0; i < 3; ++i) {
            const auto& st = runs[i].result.stationarity;
            const int tested = st.tested_pairs();
            const double pct =
                tested > 0 ? 100.0 * st.negative / tested : 0.0;
            ok = ok && runs[i].result.verdict == expected[i] && pct >= lo[i] &&
                 pct <= hi[i];
            detail += fmt("ex%d %s %.1f%%%s", i + 1,
                          runs[i].result.verdict.c_str(), pct,
                          i < 2 ? ", " : "");
        }
        report(8, "table verdicts at nx=40", ok,
               detail + fmt(", %.0f s", elapsed));
    }

    // 9: Theta magnitudes.
    {
        bool ok = true;
        double worst = 0.0;
        for (const auto& run : runs) {
            const auto& st = run.result.stationarity;
            const double theta = std::abs(st.theta);
            worst = std::max(worst, theta);
            ok = ok && theta <= std::sqrt(st.tol) && theta <= 1e-5;
        }
        report(9, "theta within sqrt(tol) and 1e-5", ok,
               fmt("max |theta| %.2e", worst));
    }

    // 10: Sigma linearity on the second example's converged iterate.
    {
        const auto& run = runs[1];
        const auto& s = run.setup;
        const PenaltyConfig cfg;
        const Vec& y = run.result.iterate.y;
        const Vec& u = run.result.u;
        const Vec& v = run.result.v;
        const LinearSolver a_solver(s.op.a_mat, LinearSolver::Kind::Spd);
        std::mt19937 rng(787);
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const Vec zu1 = random_vec(rng, s.fem.n_p, 0.0, 1.0);
            const Vec zv1 = random_vec(rng, s.fem.n_p, 0.0, 1.0);
            const Vec zu2 = random_vec(rng, s.fem.n_p, 0.0, 1.0);
            const Vec zv2 = random_vec(rng, s.fem.n_p, 0.0, 1.0);
            const double a = 0.6;
            const double b = 1.7;
            const double combined = sigma_for_pair(
                a * zu1 + b * zu2, a * zv1 + b * zv2, y, u, v, a_solver, s.op,
                s.fem, cfg, s.yd);
            const double split =
                a * sigma_for_pair(zu1, zv1, y, u, v, a_solver, s.op, s.fem,
                                   cfg, s.yd) +
                b * sigma_for_pair(zu2, zv2, y, u, v, a_solver, s.op, s.fem,
                                   cfg, s.yd);
            worst = std::max(worst,
                             std::abs(combined - split) /
                                 (1.0 + std::abs(split)));
        }
        report(10, "linearity of the test functional", worst <= 1e-9,
               fmt("max deviation %.2e", worst));
    }

    // 11: controls exactly constant along vertical grid lines.
    {
        bool ok = true;
        for (const auto& run : runs) {
            const Mesh& mesh = run.setup.mesh;
            for (int i = 0; i <= mesh.nx && ok; ++i) {
                for (int j = 1; j <= mesh.nx && ok; ++j) {
                    ok = run.result.u[mesh.vertex_index(i, j)] ==
                             run.result.u[mesh.vertex_index(i, 0)] &&
                         run.result.v[mesh.vertex_index(i, j)] ==
                             run.result.v[mesh.vertex_index(i, 0)];
                }
            }
        }
        report(11, "controls constant along vertical lines", ok,
               ok ? "exact equality" : "mismatch found");
    }
}

} // namespace

int main() {
    criterion_1_fb_grid();
    criterion_2_penalty_gradient();
    criterion_3_newton_matrix();
    criterion_4_pde_convergence();
    criterion_5_kkt_residual();
    criterion_6_ocnc_oracle();
    criterion_7_feasibility();
    criteria_8_to_11_table();

    if (failures == 0) {
        std::printf("all acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criteria failed\n", failures);
    return 1;
}
