#pragma once

#include <utility>
#include <vector>

#include "mpcc/config.hpp"
#include "mpcc/fem.hpp"
#include "mpcc/kkt.hpp"
#include "mpcc/linalg.hpp"
#include "mpcc/pde.hpp"

namespace mpcc {

/// Weighted Euclidean norm of a control pair representing the discretized
/// H1-norm: sqrt(du^T (M1+K1) du + dv^T (M1+K1) dv) on the expanded vectors.
double weighted_norm(const Vec& du, const Vec& dv, const FemMatrices& fem,
                     const ReductionMap& reduction);

struct HomotopyRecord {
    int k = 0;
    double sigma = 0.0;
    NewtonReport newton;
    double control_change = 0.0; // weighted_norm against the previous iterate
    double penalty_value = 0.0;
    double max_abs_fb = 0.0;
};

struct HomotopyTrace {
    std::vector<HomotopyRecord> records;
    bool converged = false;
    bool hit_sigma_max = false;
    bool newton_failure = false;
    bool ocnc_converged = false;
    // Outer iterations where max|fb| grew; harmless for stationary points
    // that are not global minimizers, so only monitored.
    int fb_increase_count = 0;
};

/// Outer penalty loop: initialize from the nonnegativity-constrained convex
/// problem, then track sigma_k = sigma0 * sigma_factor^k with warm-started
/// damped semismooth Newton until the weighted control change drops below
/// eps_stop.
std::pair<KktIterate, HomotopyTrace> run_homotopy(const EllipticOperator& op,
                                                  const FemMatrices& fem,
                                                  const ReductionMap& reduction,
                                                  const PenaltyConfig& cfg,
                                                  const Vec& yd);

} // namespace mpcc
