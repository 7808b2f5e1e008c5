#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "helpers.hpp"
#include "mpcc/experiments.hpp"
#include "mpcc/pde.hpp"

using namespace mpcc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace

TEST_CASE("examples: coefficient layout shared by all three") {
    ExperimentSpec spec;
    spec.example_id = 1;
    spec.nx = 8;
    const ExperimentSetup s = build_example(spec);

    // a == 1 and C == I: subtracting K(I) from A leaves the plain mass matrix.
    const Mat residual_a = test::dense(s.op.a_mat) -
                           test::dense(assemble_k(s.mesh, Mat2::Identity())) -
                           test::dense(assemble_m1(s.mesh, Vec::Ones(s.fem.n_e)));
    CHECK(residual_a.cwiseAbs().maxCoeff() < 1e-14);

    // The control strips each cover a quarter of the square.
    const Vec one = Vec::Ones(s.fem.n_p);
    CHECK(one.dot(s.op.b_mat * one) == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(one.dot(s.op.c_mat * one) == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("examples: targets") {
    ExperimentSpec spec;
    spec.nx = 8;

    spec.example_id = 1;
    const ExperimentSetup s1 = build_example(spec);
    std::set<double> values(s1.yd.data(), s1.yd.data() + s1.yd.size());
    CHECK(values == std::set<double>{1.0, 3.0});
    // Spot checks: lower-left block is background, lower-middle is raised.
    for (int e = 0; e < s1.fem.n_e; ++e) {
        const auto c = s1.mesh.centroid(e);
        if (c[0] < 0.25 && c[1] < 0.25) CHECK(s1.yd[e] == 1.0);
        if (c[0] > 0.3 && c[0] < 0.7 && c[1] < 0.2) CHECK(s1.yd[e] == 3.0);
    }

    spec.example_id = 3;
    const ExperimentSetup s3 = build_example(spec);
    CHECK((s3.yd.array() == 1.5).all());

    spec.example_id = 2;
    spec.nx = 4;
    const ExperimentSetup s2 = build_example(spec);
    const auto g1 = [](double x1) {
        return 2.0 * std::max(0.0, x1 * std::cos(0.75 * M_PI * x1));
    };
    const Vec harmonic = solve_dirichlet_laplace(
        s2.mesh, g1, [](double) { return 0.25; });
    CHECK((s2.yd - s2.fem.e10 * harmonic).cwiseAbs().maxCoeff() < 1e-13);
    // The bottom-right corner datum 2 max{0, cos(0.75 pi)} vanishes.
    CHECK(harmonic[s2.mesh.vertex_index(4, 0)] == 0.0);
}

TEST_CASE("examples: invalid specs are rejected") {
    ExperimentSpec spec;
    spec.example_id = 4;
    CHECK_THROWS_AS(build_example(spec), std::invalid_argument);
    spec.example_id = 2;
    spec.nx = 3;
    CHECK_THROWS_AS(build_example(spec), std::invalid_argument);
}

TEST_CASE("run_experiment: artifacts, determinism, state roundtrip") {
    const fs::path base = fs::path("test_artifacts");
    fs::remove_all(base);

    ExperimentSpec spec;
    spec.example_id = 3;
    spec.nx = 8;
    spec.out_dir = (base / "run_a").string();
    const ExperimentResult first = run_experiment(spec);
    CHECK(first.solver_ok);
    CHECK(first.complementarity <= 1e-4);
    CHECK((first.verdict == "passed" || first.verdict == "failed" ||
           first.verdict == "vacuous-pass"));

    for (const char* name :
         {"controls.csv", "sigma.csv", "trace.csv", "summary.json",
          "state.json"}) {
        CHECK(fs::exists(fs::path(spec.out_dir) / name));
    }

    // controls.csv samples the bottom edge: header plus nx+1 rows.
    std::ifstream controls(fs::path(spec.out_dir) / "controls.csv");
    std::string line;
    int lines = 0;
    std::getline(controls, line);
    CHECK(line == "x1,u,v");
    while (std::getline(controls, line)) ++lines;
    CHECK(lines == spec.nx + 1);

    // Bit-identical rerun.
    ExperimentSpec again = spec;
    again.out_dir = (base / "run_b").string();
    (void)run_experiment(again);
    for (const char* name : {"controls.csv", "sigma.csv", "summary.json"}) {
        CHECK(slurp(fs::path(spec.out_dir) / name) ==
              slurp(fs::path(again.out_dir) / name));
    }

    // summary.json carries the stable schema.
    const nlohmann::json summary =
        nlohmann::json::parse(slurp(fs::path(spec.out_dir) / "summary.json"));
    for (const char* key :
         {"example", "nx", "complementarity_max_fb", "tol", "theta",
          "pct_negative_pairs", "verdict", "outer_iterations"}) {
        CHECK(summary.contains(key));
    }
    CHECK(summary.at("example").get<int>() == 3);
    CHECK(summary.at("nx").get<int>() == 8);

    // check on the saved state reproduces the reported test quantities.
    std::string verdict;
    const StationarityReport rerun =
        check_state_file((fs::path(spec.out_dir) / "state.json").string(),
                         &verdict);
    CHECK(verdict == summary.at("verdict").get<std::string>());
    CHECK(rerun.theta ==
          doctest::Approx(summary.at("theta").get<double>()).epsilon(1e-12));
    CHECK(rerun.tol ==
          doctest::Approx(summary.at("tol").get<double>()).epsilon(1e-12));

    fs::remove_all(base);
}
