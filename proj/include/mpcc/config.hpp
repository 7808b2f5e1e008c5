#pragma once

namespace mpcc {

/// Parameters of the penalty homotopy and its inner Newton solver.
struct PenaltyConfig {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double epsilon = 1e-8;      // H1 regularization weight, must stay positive

    double sigma0 = 1.0;        // first penalty parameter
    double sigma_factor = 10.0; // growth factor of the penalty schedule
    double sigma_max = 1e12;    // abort threshold for the schedule
    double eps_stop = 1e-6;     // outer stopping tolerance (weighted norm)

    double newton_tol = 1e-9;   // inner stopping tolerance (residual inf-norm)
    int max_newton = 50;        // inner iteration cap per penalty step

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

} // namespace mpcc
