#pragma once

#include <stdexcept>
#include <string>

namespace isingclt {

/// Bad input: shape mismatch, out-of-range parameter, malformed file.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation could not produce a trustworthy number (non-convergence,
/// enumeration cap exceeded, degenerate statistics).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace isingclt
