#pragma once

#include <stdexcept>
#include <string>

namespace dkg {

/// Fields on different grids (or arrays of the wrong length) were combined.
class GridMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A stepper produced NaN/Inf or amplitudes beyond the blow-up threshold.
class NonFiniteError : public std::runtime_error {
public:
    NonFiniteError(const std::string& what, double time)
        : std::runtime_error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dkg
