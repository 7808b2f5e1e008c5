#pragma once

#include <utility>

#include "mpcc/fem.hpp"
#include "mpcc/linalg.hpp"

namespace mpcc {

/// Fischer-Burmeister function sqrt(a^2+b^2) - a - b. Vanishes exactly on
/// complementary pairs a >= 0, b >= 0, a*b = 0.
double fb(double a, double b);

/// Smoothed variant sqrt(a^2+b^2+2*theta) - a - b; equals fb at theta = 0.
double fb_smoothed(double a, double b, double theta);

/// Gradient of (1/2)*fb^2, with the convention (0,0) at the origin.
std::pair<double, double> fb_sq_grad(double a, double b);

/// A pair (a, b) counts as biactive once its radius drops below this
/// floating-point threshold; the complementarity residual and all of its
/// derivative contributions are treated as zero there.
bool fb_biactive(double a, double b);

/// Value and gradient of the elementwise Fischer-Burmeister penalty
/// (1/2) Phi^T M0(1) Phi with Phi = fb(E10 u, E10 v).
struct PenaltyEval {
    double value = 0.0;
    Vec grad_u;
    Vec grad_v;
};

PenaltyEval penalty_eval(const Vec& u, const Vec& v, const FemMatrices& fem);

/// Largest elementwise complementarity residual |fb(E10 u, E10 v)|.
double max_abs_fb(const Vec& u, const Vec& v, const FemMatrices& fem);

/// Generalized Jacobian of the penalty gradient with respect to (u, v),
/// stored as its three distinct n_p x n_p blocks (the (u,v) and (v,u)
/// blocks coincide). Biactive elements contribute nothing.
struct PenaltyHessian {
    SpMat huu;
    SpMat huv;
    SpMat hvv;
};

PenaltyHessian penalty_newton_matrix(const Vec& u, const Vec& v,
                                     const FemMatrices& fem);

} // namespace mpcc
