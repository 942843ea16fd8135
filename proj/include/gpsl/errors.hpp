#pragma once

#include <stdexcept>
#include <string>

namespace gpsl {

/// Thrown when a numeric argument is outside the mathematical domain of an
/// operation (non-finite input, negative radius, ...).
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when a parameter set violates a model-validity bound (for example
/// a perturbative expansion evaluated outside its trust region).
class ValidityError : public std::invalid_argument {
public:
    explicit ValidityError(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when user-facing configuration (CLI flags, config file) is
/// inconsistent or incomplete.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when an integrand produces NaN during Monte Carlo evaluation.
/// Carries the number of bad evaluations observed before aborting.
class IntegrandError : public std::runtime_error {
public:
    IntegrandError(const std::string& what, unsigned long long bad_count)
        : std::runtime_error(what), bad_evaluations(bad_count) {}
    unsigned long long bad_evaluations;
};

/// Thrown when an iterative numeric routine fails to converge and no
/// best-effort result is meaningful.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gpsl
