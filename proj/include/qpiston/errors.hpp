#pragma once

#include <stdexcept>
#include <string>

namespace qpiston {

/// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input: wrong dimensions, out-of-range parameters, malformed config.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// A requested basis order exceeds what the Hermite recurrences support.
class BasisOverflowError : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

/// Base class for failures detected while computing (as opposed to bad input).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A constructed value failed one of its structural invariants
/// (hermiticity, unitarity, unit trace, positivity, normalization).
class InvariantViolation : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Quadrature self-check failed: the rule is too coarse for the integrand.
class QuadratureConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Fixed-step integration drifted out of tolerance; refine the step.
class StepSizeError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Thermal population leaking out of the truncated basis.
class CutoffError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A quantum channel produced a state violating trace/positivity bounds.
class ChannelError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Efficiency requested for a cycle with zero heat input.
class UndefinedEfficiencyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace qpiston
