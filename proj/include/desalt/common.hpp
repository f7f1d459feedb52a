#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace desalt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data violates a documented precondition or invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// An iterative solver exhausted its iteration budget before reaching
/// its termination tolerance. Solver-specific subclasses carry the last
/// iterate so callers can inspect how far the solve got.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace desalt
