#pragma once

#include <stdexcept>
#include <string>

namespace mpcc {

/// Thrown when a linear solve fails or its residual check cannot be met.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mpcc
