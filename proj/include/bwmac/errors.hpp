#pragma once

#include <stdexcept>
#include <string>

namespace bwmac {

/// Operand dimensions are incompatible with the requested operation.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A matrix required to be invertible is singular (or numerically so).
class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A scalar input lies outside the operation's admissible range.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A request exceeds a hard capacity guard (e.g. exhaustive-search size).
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An experiment or hardware configuration failed validation.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace bwmac
