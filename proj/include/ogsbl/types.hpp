#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace ogsbl {

using Complex = std::complex<double>;
using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;
using VecR = Eigen::VectorXd;
using MatR = Eigen::MatrixXd;

/// Dimension or argument mismatch between caller-supplied objects.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Numerical breakdown (singular solve, covariance not PD, NaN guard).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File format or I/O failure.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ogsbl
