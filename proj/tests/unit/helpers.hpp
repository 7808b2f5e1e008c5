#pragma once

#include <random>

#include "mpcc/linalg.hpp"

namespace mpcc::test {

inline Mat dense(const SpMat& m) { return Mat(m); }

inline Vec random_vec(std::mt19937& rng, int n, double lo = -1.0,
                      double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Vec out(n);
    for (int i = 0; i < n; ++i) out[i] = dist(rng);
    return out;
}

} // namespace mpcc::test
