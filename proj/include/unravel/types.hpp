#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace unravel {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Thrown when a time stepper produces non-finite amplitudes. Carries the
/// step index at which the blow-up was detected and, for ensemble runs,
/// the index of the offending trajectory (-1 for single-trajectory runs).
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, long step, long trajectory = -1)
      : std::runtime_error(what), step_(step), trajectory_(trajectory) {}

  long step() const { return step_; }
  long trajectory() const { return trajectory_; }

 private:
  long step_;
  long trajectory_;
};

}  // namespace unravel
