#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rbeta {

/// Malformed or out-of-contract input (bad lengths, non-finite values, parse errors).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input outside the mathematical domain of an operation (non-positive price, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Operation invoked on a state machine that is not ready for it.
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Invalid configuration (parameter invariants violated, unknown model tag).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure (non-convergence, degenerate system).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Price panels mark a missing observation with a quiet NaN. Every other
// non-finite value is rejected at the boundary.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double x) noexcept { return std::isnan(x); }

inline void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) {
        throw InputError(std::string(what) + ": non-finite value");
    }
}

}  // namespace rbeta
