#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "mpcc/experiments.hpp"

namespace {

int run_solve(const mpcc::ExperimentSpec& spec) {
    const mpcc::ExperimentResult result = mpcc::run_experiment(spec);
    const auto& trace = result.trace;
    const auto& st = result.stationarity;
    const int tested = st.tested_pairs();

    std::printf("example              %d\n", spec.example_id);
    std::printf("nx                   %d\n", spec.nx);
    std::printf("outer iterations     %zu\n", trace.records.size());
    if (!trace.records.empty()) {
        std::printf("final sigma          %.3e\n", trace.records.back().sigma);
    }
    std::printf("max |fb|             %.3e\n", result.complementarity);
    std::printf("theta                %.3e\n", st.theta);
    std::printf("tol                  %.3e\n", st.tol);
    std::printf("tested pairs         %d\n", tested);
    std::printf("negative pairs       %d (%.1f%%)\n", st.negative,
                tested > 0 ? 100.0 * st.negative / tested : 0.0);
    std::printf("verdict              %s\n", result.verdict.c_str());

    if (!result.solver_ok) {
        std::fprintf(stderr, "homotopy did not converge (%s)\n",
                     trace.hit_sigma_max ? "sigma_max reached"
                                         : "inner Newton failure");
        return 1;
    }
    return 0;
}

int run_check(const std::string& path) {
    std::string verdict;
    const mpcc::StationarityReport report = mpcc::check_state_file(path, &verdict);
    const int tested = report.tested_pairs();
    std::printf("theta                %.3e\n", report.theta);
    std::printf("tol                  %.3e\n", report.tol);
    std::printf("tested pairs         %d\n", tested);
    std::printf("positive/zero/neg    %d/%d/%d\n", report.positive, report.zero,
                report.negative);
    std::printf("infeasible elements  %d\n", report.infeasible_elements);
    std::printf("verdict              %s\n", verdict.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Penalty homotopy solver for elliptic optimal control with "
                 "complementarity constraints on the controls"};
    app.require_subcommand(1);

    mpcc::ExperimentSpec spec;
    auto* solve = app.add_subcommand("solve", "Run one of the three examples");
    solve->add_option("--example", spec.example_id, "Example id (1, 2 or 3)")
        ->required()
        ->check(CLI::Range(1, 3));
    solve->add_option("--nx", spec.nx, "Grid cells per axis");
    solve->add_option("--epsilon", spec.cfg.epsilon, "H1 regularization weight");
    solve->add_option("--sigma0", spec.cfg.sigma0, "Initial penalty parameter");
    solve->add_option("--sigma-factor", spec.cfg.sigma_factor,
                      "Penalty growth factor");
    solve->add_option("--sigma-max", spec.cfg.sigma_max,
                      "Abort threshold for the penalty parameter");
    solve->add_option("--eps-stop", spec.cfg.eps_stop,
                      "Stopping tolerance on the weighted control change");
    solve->add_option("--out", spec.out_dir, "Output directory for artifacts");

    std::string state_path;
    auto* check = app.add_subcommand(
        "check", "Rerun the stationarity test on a saved iterate");
    check->add_option("--state", state_path, "state.json written by solve")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) {
            return run_solve(spec);
        }
        return run_check(state_path);
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 2;
    }
}
