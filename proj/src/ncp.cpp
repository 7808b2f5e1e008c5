#include "mpcc/ncp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mpcc {

double fb(double a, double b) {
    // Ordered subtraction keeps the value bitwise symmetric in (a, b).
    return std::hypot(a, b) - std::max(a, b) - std::min(a, b);
}

double fb_smoothed(double a, double b, double theta) {
    if (theta < 0.0) {
        throw std::invalid_argument("fb_smoothed: theta must be nonnegative");
    }
    if (theta == 0.0) {
        return fb(a, b);
    }
    return std::sqrt(a * a + b * b + 2.0 * theta) - a - b;
}

bool fb_biactive(double a, double b) {
    return std::hypot(a, b) <= 1e-14 * (1.0 + std::abs(a) + std::abs(b));
}

std::pair<double, double> fb_sq_grad(double a, double b) {
    if (fb_biactive(a, b)) {
        return {0.0, 0.0};
    }
    const double r = std::hypot(a, b);
    const double phi = r - a - b;
    return {phi * (a / r - 1.0), phi * (b / r - 1.0)};
}

PenaltyEval penalty_eval(const Vec& u, const Vec& v, const FemMatrices& fem) {
    if (u.size() != fem.n_p || v.size() != fem.n_p) {
        throw std::invalid_argument("penalty_eval: controls must have n_p entries");
    }

    const Vec u0 = fem.e10 * u;
    const Vec v0 = fem.e10 * v;

    PenaltyEval out;

    // Gradient rows are E10^T diag(T) M0(1) Phi with T zero on biactive
    // elements.
    Vec weighted_u(fem.n_e);
    Vec weighted_v(fem.n_e);
    for (int e = 0; e < fem.n_e; ++e) {
        const double a = u0[e];
        const double b = v0[e];
        const double phi = fb(a, b);
        out.value += 0.5 * fem.m0[e] * phi * phi;
        if (fb_biactive(a, b)) {
            weighted_u[e] = 0.0;
            weighted_v[e] = 0.0;
        } else {
            const double r = std::hypot(a, b);
            weighted_u[e] = (a / r - 1.0) * fem.m0[e] * phi;
            weighted_v[e] = (b / r - 1.0) * fem.m0[e] * phi;
        }
    }
    out.grad_u = fem.e10.transpose() * weighted_u;
    out.grad_v = fem.e10.transpose() * weighted_v;
    return out;
}

double max_abs_fb(const Vec& u, const Vec& v, const FemMatrices& fem) {
    if (u.size() != fem.n_p || v.size() != fem.n_p) {
        throw std::invalid_argument("max_abs_fb: controls must have n_p entries");
    }
    const Vec u0 = fem.e10 * u;
    const Vec v0 = fem.e10 * v;
    double worst = 0.0;
    for (int e = 0; e < fem.n_e; ++e) {
        worst = std::max(worst, std::abs(fb(u0[e], v0[e])));
    }
    return worst;
}

PenaltyHessian penalty_newton_matrix(const Vec& u, const Vec& v,
                                     const FemMatrices& fem) {
    if (u.size() != fem.n_p || v.size() != fem.n_p) {
        throw std::invalid_argument(
            "penalty_newton_matrix: controls must have n_p entries");
    }

    const Vec u0 = fem.e10 * u;
    const Vec v0 = fem.e10 * v;

    std::vector<Triplet> tuu;
    std::vector<Triplet> tuv;
    std::vector<Triplet> tvv;

    // Element connectivity recovered from the nonzero pattern of E10.
    std::vector<std::array<int, 3>> verts(fem.n_e);
    std::vector<int> fill(fem.n_e, 0);
    for (int col = 0; col < fem.e10.outerSize(); ++col) {
        for (SpMat::InnerIterator it(fem.e10, col); it; ++it) {
            verts[it.row()][fill[it.row()]++] = static_cast<int>(it.col());
        }
    }

    for (int e = 0; e < fem.n_e; ++e) {
        const double a = u0[e];
        const double b = v0[e];
        if (fb_biactive(a, b)) {
            continue;
        }
        const double r = std::hypot(a, b);
        const double phi = r - a - b;
        const double ga = a / r - 1.0;
        const double gb = b / r - 1.0;
        const double r3 = r * r * r;
        // Hessian of (1/2) fb^2: g g^T + phi (I/r - (a,b)(a,b)^T / r^3).
        const double haa = ga * ga + phi * (1.0 / r - a * a / r3);
        const double hab = ga * gb + phi * (-a * b / r3);
        const double hbb = gb * gb + phi * (1.0 / r - b * b / r3);

        const double w = fem.m0[e] / 9.0; // two factors of 1/3 from E10
        for (int ia = 0; ia < 3; ++ia) {
            for (int ib = 0; ib < 3; ++ib) {
                const int row = verts[e][ia];
                const int col = verts[e][ib];
                tuu.emplace_back(row, col, w * haa);
                tuv.emplace_back(row, col, w * hab);
                tvv.emplace_back(row, col, w * hbb);
            }
        }
    }

    PenaltyHessian h;
    h.huu.resize(fem.n_p, fem.n_p);
    h.huv.resize(fem.n_p, fem.n_p);
    h.hvv.resize(fem.n_p, fem.n_p);
    h.huu.setFromTriplets(tuu.begin(), tuu.end());
    h.huv.setFromTriplets(tuv.begin(), tuv.end());
    h.hvv.setFromTriplets(tvv.begin(), tvv.end());
    return h;
}

} // namespace mpcc
