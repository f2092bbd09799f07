// errors.hpp — exception types for configuration, integrator, and state validity failures
#pragma once

#include <stdexcept>
#include <string>

namespace wqed {

// Bad user-supplied parameters (grids, distributions, config files).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure during time integration (instability, trace drift, norm blowup).
struct integrator_error : std::runtime_error {
    explicit integrator_error(const std::string& what) : std::runtime_error(what) {}
};

// A density matrix or state vector violating its invariants (NaN, non-Hermitian, ...).
struct invalid_state_error : std::runtime_error {
    explicit invalid_state_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace wqed
