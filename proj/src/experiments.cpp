#include "mpcc/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "mpcc/errors.hpp"
#include "mpcc/ncp.hpp"

namespace mpcc {

namespace {

std::string fmt17(double value) {
    char buffer[48];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

Vec target_for_example(const ExperimentSpec& spec, const Mesh& mesh,
                       const FemMatrices& fem) {
    Vec yd(mesh.n_elements());
    switch (spec.example_id) {
    case 1:
        for (int e = 0; e < mesh.n_elements(); ++e) {
            const auto c = mesh.centroid(e);
            const bool lower = c[0] > 0.25 && c[0] < 0.75 && c[1] < 0.25;
            const bool upper = c[0] < 0.5 && c[1] > 0.75;
            yd[e] = (lower || upper) ? 3.0 : 1.0;
        }
        break;
    case 2: {
        const auto g1 = [](double x1) {
            return 2.0 * std::max(0.0, x1 * std::cos(0.75 * M_PI * x1));
        };
        const auto g2 = [](double) { return 0.25; };
        yd = fem.e10 * solve_dirichlet_laplace(mesh, g1, g2);
        break;
    }
    case 3:
        yd.setConstant(1.5);
        break;
    default:
        throw std::invalid_argument("build_example: example_id must be 1, 2 or 3");
    }
    return yd;
}

std::string verdict_string(const StationarityReport& report) {
    if (report.vacuous) return "vacuous-pass";
    return report.passed ? "passed" : "failed";
}

void write_controls_csv(const std::filesystem::path& path, const Mesh& mesh,
                        const Vec& u, const Vec& v) {
    std::ofstream out(path);
    out << "x1,u,v\n";
    for (int i = 0; i <= mesh.nx; ++i) {
        const int node = mesh.vertex_index(i, 0);
        out << fmt17(mesh.vertices[node][0]) << ',' << fmt17(u[node]) << ','
            << fmt17(v[node]) << '\n';
    }
}

// One row per direction pair; x is the strip line of the u direction, y
// the strip line of the v direction, so the rows tile the unit square.
void write_sigma_csv(const std::filesystem::path& path, const Mesh& mesh,
                     const StationarityReport& report) {
    static const char* kNames[] = {"negative", "zero", "positive"};
    std::ofstream out(path);
    out << "x,y,sigma,classification\n";
    for (int i = 0; i < report.grid; ++i) {
        const double xi = mesh.vertices[mesh.vertex_index(i, 0)][0];
        for (int j = 0; j < report.grid; ++j) {
            const int t = i * report.grid + j;
            out << fmt17(xi) << ','
                << fmt17(mesh.vertices[mesh.vertex_index(j, 0)][0]) << ','
                << fmt17(report.sigma_values[t]) << ','
                << kNames[report.classification[t] + 1] << '\n';
        }
    }
}

void write_trace_csv(const std::filesystem::path& path,
                     const HomotopyTrace& trace) {
    std::ofstream out(path);
    out << "k,sigma,newton_iterations,newton_converged,final_residual,"
           "control_change,penalty_value,max_abs_fb\n";
    for (const auto& rec : trace.records) {
        out << rec.k << ',' << fmt17(rec.sigma) << ',' << rec.newton.iterations
            << ',' << (rec.newton.converged ? 1 : 0) << ','
            << fmt17(rec.newton.final_residual) << ','
            << fmt17(rec.control_change) << ',' << fmt17(rec.penalty_value)
            << ',' << fmt17(rec.max_abs_fb) << '\n';
    }
}

nlohmann::json config_to_json(const PenaltyConfig& cfg) {
    return {{"alpha1", cfg.alpha1},
            {"alpha2", cfg.alpha2},
            {"epsilon", cfg.epsilon},
            {"sigma0", cfg.sigma0},
            {"sigma_factor", cfg.sigma_factor},
            {"sigma_max", cfg.sigma_max},
            {"eps_stop", cfg.eps_stop},
            {"newton_tol", cfg.newton_tol},
            {"max_newton", cfg.max_newton}};
}

PenaltyConfig config_from_json(const nlohmann::json& j) {
    PenaltyConfig cfg;
    cfg.alpha1 = j.at("alpha1").get<double>();
    cfg.alpha2 = j.at("alpha2").get<double>();
    cfg.epsilon = j.at("epsilon").get<double>();
    cfg.sigma0 = j.at("sigma0").get<double>();
    cfg.sigma_factor = j.at("sigma_factor").get<double>();
    cfg.sigma_max = j.at("sigma_max").get<double>();
    cfg.eps_stop = j.at("eps_stop").get<double>();
    cfg.newton_tol = j.at("newton_tol").get<double>();
    cfg.max_newton = j.at("max_newton").get<int>();
    return cfg;
}

std::vector<double> to_std(const Vec& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Vec from_std(const std::vector<double>& v) {
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

void ExperimentSpec::validate() const {
    if (example_id < 1 || example_id > 3) {
        throw std::invalid_argument("example_id must be 1, 2 or 3");
    }
    if (nx < 4) {
        throw std::invalid_argument("nx must be at least 4");
    }
    cfg.validate();
}

ExperimentSetup build_example(const ExperimentSpec& spec) {
    spec.validate();

    ExperimentSetup setup;
    setup.mesh = build_structured_mesh(spec.nx);
    setup.fem = assemble_fem_matrices(setup.mesh);
    setup.reduction = assemble_reduction(setup.mesh);

    const int n_e = setup.mesh.n_elements();
    Vec b_coef(n_e);
    Vec c_coef(n_e);
    for (int e = 0; e < n_e; ++e) {
        const auto c = setup.mesh.centroid(e);
        b_coef[e] = c[1] < 0.25 ? 1.0 : 0.0;
        c_coef[e] = c[1] > 0.75 ? 1.0 : 0.0;
    }
    setup.op = assemble_elliptic_operator(setup.mesh, Vec::Ones(n_e),
                                          Mat2::Identity(), b_coef, c_coef);
    setup.yd = target_for_example(spec, setup.mesh, setup.fem);
    return setup;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    const ExperimentSetup setup = build_example(spec);

    ExperimentResult result;
    auto [iterate, trace] =
        run_homotopy(setup.op, setup.fem, setup.reduction, spec.cfg, setup.yd);
    result.iterate = std::move(iterate);
    result.trace = std::move(trace);
    result.solver_ok = result.trace.converged;

    result.u = setup.reduction.r * result.iterate.u;
    result.v = setup.reduction.r * result.iterate.v;
    result.complementarity = max_abs_fb(result.u, result.v, setup.fem);

    const double tau =
        default_activity_threshold(result.u, result.v, setup.fem);
    result.stationarity =
        run_stationarity_test(result.iterate.y, result.u, result.v, setup.op,
                              setup.fem, setup.reduction, spec.cfg, setup.yd,
                              tau);
    result.verdict = verdict_string(result.stationarity);

    if (!spec.out_dir.empty()) {
        const std::filesystem::path dir(spec.out_dir);
        std::filesystem::create_directories(dir);

        write_controls_csv(dir / "controls.csv", setup.mesh, result.u, result.v);
        write_sigma_csv(dir / "sigma.csv", setup.mesh, result.stationarity);
        write_trace_csv(dir / "trace.csv", result.trace);

        const int tested = result.stationarity.tested_pairs();
        nlohmann::json summary = {
            {"example", spec.example_id},
            {"nx", spec.nx},
            {"complementarity_max_fb", result.complementarity},
            {"tol", result.stationarity.tol},
            {"theta", result.stationarity.theta},
            {"pct_negative_pairs",
             tested > 0 ? 100.0 * result.stationarity.negative / tested : 0.0},
            {"verdict", result.verdict},
            {"outer_iterations",
             static_cast<int>(result.trace.records.size())}};
        std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';

        nlohmann::json state = {{"example", spec.example_id},
                                {"nx", spec.nx},
                                {"config", config_to_json(spec.cfg)},
                                {"y", to_std(result.iterate.y)},
                                {"u", to_std(result.u)},
                                {"v", to_std(result.v)},
                                {"p", to_std(result.iterate.p)}};
        std::ofstream(dir / "state.json") << state.dump() << '\n';
    }
    return result;
}

StationarityReport check_state_file(const std::string& path,
                                    std::string* verdict) {
    std::ifstream in(path);
    if (!in) {
        throw SolverError("check_state_file: cannot open " + path);
    }
    nlohmann::json state = nlohmann::json::parse(in);

    ExperimentSpec spec;
    spec.example_id = state.at("example").get<int>();
    spec.nx = state.at("nx").get<int>();
    spec.cfg = config_from_json(state.at("config"));
    const ExperimentSetup setup = build_example(spec);

    const Vec y = from_std(state.at("y").get<std::vector<double>>());
    const Vec u = from_std(state.at("u").get<std::vector<double>>());
    const Vec v = from_std(state.at("v").get<std::vector<double>>());
    if (y.size() != setup.fem.n_p || u.size() != setup.fem.n_p ||
        v.size() != setup.fem.n_p) {
        throw std::invalid_argument("check_state_file: state has wrong size");
    }

    const double tau = default_activity_threshold(u, v, setup.fem);
    StationarityReport report = run_stationarity_test(
        y, u, v, setup.op, setup.fem, setup.reduction, spec.cfg, setup.yd, tau);
    if (verdict) *verdict = verdict_string(report);
    return report;
}

} // namespace mpcc
