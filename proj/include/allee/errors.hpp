#pragma once

#include <stdexcept>
#include <string>

namespace allee {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (e.g. per-capita rate at zero density).
class DomainError : public Error {
public:
    using Error::Error;
};

/// The predator nullcline g2 is evaluated at its pole.
class PoleError : public Error {
public:
    using Error::Error;
};

/// A bifurcation precondition or nondegeneracy gate does not hold.
class GateError : public Error {
public:
    using Error::Error;
};

/// A bracket does not straddle the sought change.
class BracketError : public Error {
public:
    using Error::Error;
};

/// Adaptive step size underflowed, or the step budget ran out.
class StepFailure : public Error {
public:
    using Error::Error;
};

class NotSaddle : public Error {
public:
    using Error::Error;
};

/// A zero eigenvalue has a Jordan block (left and right null vectors orthogonal).
class NotSemisimple : public Error {
public:
    using Error::Error;
};

/// A tracked equilibrium branch vanished or jumped.
class BranchLost : public Error {
public:
    using Error::Error;
};

/// A manifold branch never reached its section.
class NoCrossing : public Error {
public:
    using Error::Error;
};

/// Malformed configuration text, unknown key or missing value.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace allee
