#pragma once

#include <stdexcept>
#include <string>

namespace sconcave {

// Parameter combination outside the regime where a quantity is defined.
// The message names the violated inequality, e.g. "1 + n*s <= 0".
struct RegimeError : std::domain_error {
    explicit RegimeError(const std::string& what) : std::domain_error(what) {}
};

// Beta-function argument left the positive domain (a <= 0 or b <= 0).
struct BetaDomainError : RegimeError {
    explicit BetaDomainError(const std::string& what) : RegimeError(what) {}
};

// The consistency finder hit its mistake cap without separating the sample.
struct NonSeparableError : std::runtime_error {
    explicit NonSeparableError(const std::string& what) : std::runtime_error(what) {}
};

// Constrained feasible set is empty (ball intersection has no point).
struct InfeasibleError : std::runtime_error {
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// Conditional estimator starved: acceptance rate below the floor.
struct BandStarvationError : std::runtime_error {
    explicit BandStarvationError(const std::string& what) : std::runtime_error(what) {}
};

// Sampling stream exhausted before enough points were accepted.
struct StreamExhaustedError : std::runtime_error {
    explicit StreamExhaustedError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sconcave
