#pragma once

#include <stdexcept>
#include <string>

namespace optomech {

/// Bad user input: malformed config, parameter outside its domain.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A physical or mathematical invariant failed to hold on a computed object.
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Root finding, quadrature or sampling could not reach the requested accuracy.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The requested measurement outcome has (numerically) zero probability.
class ZeroLikelihood : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace optomech
