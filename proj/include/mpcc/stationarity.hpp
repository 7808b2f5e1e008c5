#pragma once

#include <vector>

#include "mpcc/config.hpp"
#include "mpcc/fem.hpp"
#include "mpcc/linalg.hpp"
#include "mpcc/pde.hpp"

namespace mpcc {

/// Elementwise activity pattern of a control pair, read off the P0
/// projections u0 = E10 u, v0 = E10 v with threshold tau_act. Elements
/// fitting none of the three patterns (for instance both controls active)
/// are collected as residue.
struct IndexSets {
    std::vector<int> i_plus0; // u0 > 0, v0 = 0
    std::vector<int> i_00;    // u0 = 0, v0 = 0
    std::vector<int> i_0plus; // u0 = 0, v0 > 0
    std::vector<int> residue;
};

/// Result of the pairwise test. The tested directions form a full grid:
/// slot i on the u side carries the i-th strip basis function when every
/// element it touches allows a u perturbation, the zero function otherwise,
/// and likewise on the v side. Sigma is stored row-major over the
/// (grid x grid) pairs, sigma_values[i * grid + j] = slot_u[i] + slot_v[j].
struct StationarityReport {
    double theta = 0.0;
    double tol = 0.0;
    double min_sigma = 0.0;
    int grid = 0;
    std::vector<int> feasible_u;     // slots whose strip survived screening
    std::vector<int> feasible_v;
    Vec slot_u;                      // per-slot contributions, zero if screened
    Vec slot_v;
    Vec sigma_values;                // one entry per pair, row-major
    std::vector<int> classification; // +1 positive, 0 zero, -1 negative
    int positive = 0;
    int zero = 0;
    int negative = 0;
    int infeasible_elements = 0;
    bool passed = false;
    bool vacuous = false;

    int tested_pairs() const { return grid * grid; }
};

double default_activity_threshold(const Vec& u, const Vec& v,
                                  const FemMatrices& fem);

IndexSets classify_elements(const Vec& u, const Vec& v, const FemMatrices& fem,
                            double tau_act);

/// The quadratic form Theta of the first test condition, including the
/// epsilon regularization terms of both controls.
double compute_theta(const Vec& y, const Vec& u, const Vec& v,
                     const FemMatrices& fem, const PenaltyConfig& cfg,
                     const Vec& yd);

/// Sigma(z_u, z_v): solves the state equation for z_y, then evaluates the
/// bilinear test form at the supplied iterate.
double sigma_for_pair(const Vec& zu, const Vec& zv, const Vec& y, const Vec& u,
                      const Vec& v, const EllipticOperator& op,
                      const FemMatrices& fem, const PenaltyConfig& cfg,
                      const Vec& yd);
double sigma_for_pair(const Vec& zu, const Vec& zv, const Vec& y, const Vec& u,
                      const Vec& v, const LinearSolver& a_solver,
                      const EllipticOperator& op, const FemMatrices& fem,
                      const PenaltyConfig& cfg, const Vec& yd);

/// Runs the test over all pairs of control basis directions. Candidate
/// directions are the columns of R (one strip per vertical grid line); a
/// strip enters on the u side only when all elements in its support lie in
/// I+0 or I00, on the v side only when they lie in I0+ or I00, and is
/// replaced by the zero direction otherwise. Every Sigma value is
/// classified against tol = 0.01 |min Sigma| and the verdict rule applies:
/// passed iff |Theta| <= sqrt(tol) and at most 10% of the pairs are
/// negative. An iterate whose screening removes every strip on both sides
/// passes vacuously.
StationarityReport run_stationarity_test(const Vec& y, const Vec& u,
                                         const Vec& v,
                                         const EllipticOperator& op,
                                         const FemMatrices& fem,
                                         const ReductionMap& reduction,
                                         const PenaltyConfig& cfg,
                                         const Vec& yd, double tau_act);

} // namespace mpcc
