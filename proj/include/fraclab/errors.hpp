#pragma once

#include <stdexcept>
#include <string>

namespace fraclab {

/// Violated operation precondition (bad dimension, invalid bounds, ...).
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A computation failed numerically (non-convergence, degenerate factorization,
/// invariant violated at runtime).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or unparseable configuration input.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace fraclab
