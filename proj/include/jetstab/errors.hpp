#pragma once

#include <stdexcept>
#include <string>

namespace jetstab {

// Bad user input or violated module invariant (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// NaN, solver failure, degenerate geometry (CLI exit code 3).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// min(rho + eta) fell below the degeneracy threshold.
struct DomainError : NumericError {
    using NumericError::NumericError;
};

// Fixed-point map failed to contract.
struct ConvergenceError : NumericError {
    using NumericError::NumericError;
};

}  // namespace jetstab
