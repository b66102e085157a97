#pragma once

#include <stdexcept>
#include <string>

namespace chaoscomm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument or parameter set was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A state component left the 1e6 magnitude cap or became non-finite.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// A time-scaling function returned a value outside (0, inf).
class ScalingBoundError : public Error {
public:
    using Error::Error;
};

/// Jacobian requested exactly on a breakpoint of the nonlinearity.
class BreakpointError : public Error {
public:
    using Error::Error;
};

/// The outer slope makes the equilibrium equations degenerate (1 + m1 == 0).
class DegenerateSlopeError : public Error {
public:
    using Error::Error;
};

/// Two inputs that must share a shape (length, dt) do not.
class ShapeMismatchError : public Error {
public:
    using Error::Error;
};

/// Not enough structure in a signal for the requested analysis (too short, or
/// a window without extrema).
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

}  // namespace chaoscomm
