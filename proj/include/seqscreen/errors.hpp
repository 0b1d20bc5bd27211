#pragma once

#include <stdexcept>
#include <string>

namespace seqscreen {

/// Base class for every error raised by the solver.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A callable returned a non-finite value at `abscissa()`.
class EvaluationError : public Error {
public:
    EvaluationError(double abscissa, double value);
    [[nodiscard]] double abscissa() const noexcept { return abscissa_; }
    [[nodiscard]] double value() const noexcept { return value_; }

private:
    double abscissa_;
    double value_;
};

/// Root finder was handed an interval without a sign change.
class BracketError : public Error {
public:
    BracketError(double lo, double hi, double f_lo, double f_hi);
};

/// A density needed as a divisor is zero and no extension is declared.
class UndefinedDensityError : public Error {
public:
    using Error::Error;
};

/// A quantity is undefined at a point where the virtual value is non-positive.
class ExcludedPointError : public Error {
public:
    using Error::Error;
};

/// The operation needs structure the model does not have (e.g. multiplicative values).
class UnsupportedModelError : public Error {
public:
    using Error::Error;
};

/// Parameters violate a documented precondition.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Regularity or stochastic-ordering assumptions fail; the solver refuses to continue.
class AssumptionError : public Error {
public:
    using Error::Error;
};

/// A run configuration is malformed or references something that does not exist.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace seqscreen
