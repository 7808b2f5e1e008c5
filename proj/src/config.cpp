#include "mpcc/config.hpp"

#include <stdexcept>

namespace mpcc {

void PenaltyConfig::validate() const {
    if (alpha1 < 0.0 || alpha2 < 0.0) {
        throw std::invalid_argument("PenaltyConfig: alpha1, alpha2 must be nonnegative");
    }
    if (epsilon <= 0.0) {
        throw std::invalid_argument("PenaltyConfig: epsilon must be positive");
    }
    if (sigma0 <= 0.0 || sigma_max < sigma0) {
        throw std::invalid_argument("PenaltyConfig: need 0 < sigma0 <= sigma_max");
    }
    if (sigma_factor <= 1.0) {
        throw std::invalid_argument("PenaltyConfig: sigma_factor must exceed 1");
    }
    if (eps_stop <= 0.0 || newton_tol <= 0.0) {
        throw std::invalid_argument("PenaltyConfig: tolerances must be positive");
    }
    if (max_newton < 1) {
        throw std::invalid_argument("PenaltyConfig: max_newton must be at least 1");
    }
}

} // namespace mpcc
