#pragma once

#include <stdexcept>
#include <string>

namespace loggle {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or non-finite input data.
class InvalidDataError : public Error
{
public:
    using Error::Error;
};

/// Input outside the mathematical domain of an operation (e.g. log of a non-positive price).
class DomainError : public Error
{
public:
    using Error::Error;
};

/// Invalid tuning or solver parameter.
class ParameterError : public Error
{
public:
    using Error::Error;
};

/// A variable (column) with zero variance or non-positive smoothed variance.
class DegenerateVariableError : public Error
{
public:
    DegenerateVariableError(const std::string& what, std::string variable)
        : Error(what), variable_(std::move(variable))
    {}

    const std::string& variable() const { return variable_; }

private:
    std::string variable_;
};

/// No kernel mass at the requested time.
class EmptyWindowError : public Error
{
public:
    EmptyWindowError(double t, double h);

    double time() const { return time_; }
    double bandwidth() const { return bandwidth_; }

private:
    double time_;
    double bandwidth_;
};

/// ADMM residuals at the point the iteration budget ran out.
struct AdmmReport
{
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double primal_tolerance = 0.0;
    double dual_tolerance = 0.0;
    bool converged = false;
};

class NonConvergenceError : public Error
{
public:
    NonConvergenceError(const std::string& what, AdmmReport report)
        : Error(what), report_(report)
    {}

    const AdmmReport& report() const { return report_; }

private:
    AdmmReport report_;
};

/// Constrained maximum likelihood has no positive-definite solution for the given pattern.
class InfeasibleError : public Error
{
public:
    using Error::Error;
};

/// Simulated precision matrix is not positive definite.
class GenerationError : public Error
{
public:
    GenerationError(const std::string& what, double t) : Error(what), time_(t) {}

    double time() const { return time_; }

private:
    double time_;
};

}  // namespace loggle
