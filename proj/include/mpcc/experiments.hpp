#pragma once

#include <string>

#include "mpcc/config.hpp"
#include "mpcc/fem.hpp"
#include "mpcc/homotopy.hpp"
#include "mpcc/linalg.hpp"
#include "mpcc/mesh.hpp"
#include "mpcc/pde.hpp"
#include "mpcc/stationarity.hpp"

namespace mpcc {

/// One of the three model problems on the unit square: distributed control
/// on the bottom strip x2 < 0.25 against control on the top strip
/// x2 > 0.75, both constant along x2, with targets
///   1: piecewise constant with values 1 and 3,
///   2: trace of a harmonic function with mixed boundary data,
///   3: the constant 1.5.
struct ExperimentSpec {
    int example_id = 1;
    int nx = 80;
    PenaltyConfig cfg;
    std::string out_dir; // empty: compute only, write nothing

    void validate() const;
};

struct ExperimentSetup {
    Mesh mesh;
    FemMatrices fem;
    EllipticOperator op;
    ReductionMap reduction;
    Vec yd; // elementwise (P0) target
};

struct ExperimentResult {
    KktIterate iterate; // reduced controls
    Vec u;              // expanded nodal controls
    Vec v;
    HomotopyTrace trace;
    StationarityReport stationarity;
    double complementarity = 0.0; // max elementwise |fb|
    std::string verdict;
    bool solver_ok = false;
};

ExperimentSetup build_example(const ExperimentSpec& spec);

/// Full pipeline; with a nonempty out_dir writes controls.csv, sigma.csv,
/// trace.csv, summary.json and state.json into it.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Reruns the stationarity test on an iterate saved by run_experiment.
StationarityReport check_state_file(const std::string& path,
                                    std::string* verdict = nullptr);

} // namespace mpcc
