#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace majb {

// Base for every error raised by the library. The CLI maps these to exit
// code 1; usage_error maps to exit code 2.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

class usage_error : public error {
public:
    explicit usage_error(const std::string& msg) : error(msg) {}
};

// Chain length exceeds the configured capacity (MAJB_MAX_N, default 20).
class capacity_error : public error {
public:
    explicit capacity_error(const std::string& msg) : error(msg) {}
};

// A caller asserted parity symmetry but the operator has off-block weight.
class symmetry_violation_error : public error {
public:
    explicit symmetry_violation_error(const std::string& msg) : error(msg) {}
};

// Iterative eigensolver ran out of its matvec budget.
class solver_error : public error {
public:
    solver_error(const std::string& msg, double worst_residual)
        : error(msg), worst_residual(worst_residual) {}
    double worst_residual;
};

// A transition frequency fell below the floor where the high-frequency
// bath treatment is valid.
class small_gap_error : public error {
public:
    explicit small_gap_error(const std::string& msg) : error(msg) {}
};

// Bath statistics does not match the noise type it was used for.
class statistics_mismatch_error : public error {
public:
    explicit statistics_mismatch_error(const std::string& msg) : error(msg) {}
};

// Steady state is not unique; carries the flat indices of the retained
// levels spanning the stationary population subspace.
class multiplicity_error : public error {
public:
    multiplicity_error(const std::string& msg, std::vector<int> stationary_levels)
        : error(msg), stationary_levels(std::move(stationary_levels)) {}
    std::vector<int> stationary_levels;
};

// A trajectory state violated a density-matrix invariant.
class integration_error : public error {
public:
    integration_error(const std::string& msg, double time)
        : error(msg), time(time) {}
    double time;
};

class io_error : public error {
public:
    explicit io_error(const std::string& msg) : error(msg) {}
};

}  // namespace majb
