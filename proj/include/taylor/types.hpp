#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace taylor {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Right-hand side u -> f(u) and its Jacobian u -> df/du.
using RhsFunction = std::function<Vector(const Vector&)>;
using JacobianFunction = std::function<Matrix(const Vector&)>;

// (m, u) -> f^(m)(u) for a scalar right-hand side; m = 0 is f itself.
using ScalarDerivatives = std::function<double(int, double)>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct NewtonConfig {
  double tolerance = 1e-13;
  int max_iterations = 50;
  // Consecutive residual increases before the iteration is declared divergent.
  int divergence_window = 4;
};

struct NewtonStats {
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
};

// Thrown when Newton's method fails to converge for one step. Carries the
// last iterate so callers can inspect what went wrong.
class StepFailure : public Error {
 public:
  StepFailure(const std::string& what, NewtonStats stats, Vector last_iterate)
      : Error(what), stats_(stats), last_iterate_(std::move(last_iterate)) {}

  const NewtonStats& stats() const { return stats_; }
  const Vector& last_iterate() const { return last_iterate_; }

 private:
  NewtonStats stats_;
  Vector last_iterate_;
};

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace taylor
