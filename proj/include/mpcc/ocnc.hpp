#pragma once

#include <vector>

#include "mpcc/config.hpp"
#include "mpcc/fem.hpp"
#include "mpcc/linalg.hpp"
#include "mpcc/pde.hpp"

namespace mpcc {

/// Solution of the nonnegativity-constrained convex problem used to
/// initialize the penalty homotopy.
struct OcncSolution {
    Vec y;
    Vec u;
    Vec v;
    Vec p;
    bool converged = false;
    double kkt_residual = 0.0;
};

struct OcncOptions {
    double gamma0 = 1.0;
    double gamma_factor = 10.0;
    double gamma_max = 1e8;
    double tol = 1e-8;
    double feas_tol = 1e-6;
    int max_newton = 100;
};

struct OcncGammaRecord {
    double gamma = 0.0;
    int newton_iterations = 0;
    double residual = 0.0;
    double objective_start = 0.0; // penalized objective at the warm start
    double objective_end = 0.0;   // penalized objective at the subproblem solution
};

OcncSolution solve_ocnc(const EllipticOperator& op, const FemMatrices& fem,
                        const ReductionMap& reduction, const PenaltyConfig& cfg,
                        const Vec& yd, const OcncOptions& options,
                        std::vector<OcncGammaRecord>* trace = nullptr);

OcncSolution solve_ocnc(const EllipticOperator& op, const FemMatrices& fem,
                        const ReductionMap& reduction, const PenaltyConfig& cfg,
                        const Vec& yd);

} // namespace mpcc
