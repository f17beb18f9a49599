#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace cshock {

using Scalar = double;

using MatrixXd = Eigen::MatrixXd;
using VectorXd = Eigen::VectorXd;
using Matrix2d = Eigen::Matrix2d;

template <typename T>
using VectorX = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
using MatrixX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Errors. Everything thrown by the library derives from Error so callers can
// catch the family; the CLI maps the two branches onto exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid input: malformed config, out-of-range argument, violated precondition.
struct ConfigError : Error {
  using Error::Error;
};

struct DomainError : ConfigError {
  using ConfigError::ConfigError;
};

// Numerical failure: the inputs were well formed but a computation could not finish.
struct NumericalError : Error {
  using Error::Error;
};

// E[Z^k e^{cZ}] is infinite for the requested tilt.
struct DivergenceError : NumericalError {
  using NumericalError::NumericalError;
};

struct BracketError : NumericalError {
  using NumericalError::NumericalError;
};

struct ConvergenceError : NumericalError {
  using NumericalError::NumericalError;
};

struct PositivityError : NumericalError {
  using NumericalError::NumericalError;
};

// A simulated intensity exceeded its declared thinning bound.
struct DominanceError : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace cshock
