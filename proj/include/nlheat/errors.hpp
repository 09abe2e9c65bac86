#pragma once

#include <stdexcept>
#include <string>

namespace nlheat {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical procedure did not reach its tolerance. Carries the best
/// value obtained and an error estimate so callers can still report it.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double partial = 0.0, double error_estimate = 0.0)
        : std::runtime_error(what), partial_(partial), error_(error_estimate) {}

    double partial() const noexcept { return partial_; }
    double error_estimate() const noexcept { return error_; }

private:
    double partial_;
    double error_;
};

/// Parameter combination outside the supported configuration space.
class UnsupportedError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation would exceed its memory/work budget.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration (JSON schema, CLI flags).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace nlheat
