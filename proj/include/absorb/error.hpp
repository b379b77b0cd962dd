#pragma once

#include <stdexcept>
#include <string>

namespace absorb {

/// Malformed or inconsistent experiment description.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not reach its requested accuracy.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A conservation, energy or spectral audit failed. These are theorems of the
/// scheme, so a violation indicates a defect rather than a tuning problem.
class InvariantError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A file could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace absorb
