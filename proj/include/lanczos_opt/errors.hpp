#pragma once

#include <stdexcept>
#include <string>

namespace lanczos_opt {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what), message_(what) {}

    const char* what() const noexcept override { return message_.c_str(); }

    /// Prefixes the message with where the error surfaced.
    void add_context(const std::string& context) { message_ = context + ": " + message_; }

private:
    std::string message_;
};

/// Invalid argument or violated precondition of an operation.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// A scalar function is undefined (non-finite) at a point it must be evaluated at.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Zero or negative pivot in a factorization that requires positive definiteness.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Iterative method (eigensolver, Remez exchange) failed to converge.
/// `best_estimate` carries the best value reached when one exists.
class ConvergenceError : public Error {
public:
    explicit ConvergenceError(const std::string& what, double best_estimate = 0.0)
        : Error(what), best_estimate_(best_estimate) {}

    double best_estimate() const noexcept { return best_estimate_; }

private:
    double best_estimate_;
};

/// Singular or numerically degenerate linear system inside an iterative method.
class DegeneracyError : public Error {
public:
    using Error::Error;
};

/// Quadrature could not reach the requested accuracy within its evaluation budget.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double estimate, double error_estimate)
        : Error(what), estimate_(estimate), error_estimate_(error_estimate) {}

    double estimate() const noexcept { return estimate_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double estimate_;
    double error_estimate_;
};

/// The Krylov space became invariant; quantities defined only for m < M were requested.
class LuckyBreakdownError : public Error {
public:
    using Error::Error;
};

/// Malformed or unknown experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace lanczos_opt
