#pragma once

// Taylor steppers built from exact derivatives: closed forms for the forced
// linear scalar equation u' = lambda u + g(t), and a Newton-based implicit
// stepper for scalar autonomous problems driven by Faa di Bruno's formula.

#include "taylor/types.hpp"

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace taylor {

/// Truncated exponential Q_j(x) = sum_{k<=j} x^k / k!, by Horner's rule.
/// Works for real and complex arguments.
template <typename Scalar>
Scalar q_eval(int degree, const Scalar& x) {
  Scalar acc(1);
  for (int k = degree; k >= 1; --k) acc = Scalar(1) + (x / Scalar(k)) * acc;
  return acc;
}

/// u' = lambda u + g(t). An empty `g_deriv` means g == 0.
struct LinearScalarProblem {
  double lambda = 0.0;
  // (j, t) -> g^(j)(t)
  std::function<double(int, double)> g_deriv;
  double u0 = 0.0;
  double t0 = 0.0;
  double T = 1.0;
  std::function<double(double)> exact;

  bool forced() const { return static_cast<bool>(g_deriv); }
};

/// Implicit Taylor step of order R landing at t_next:
///   u_{n+1} = u_n / Q_R(-h l) - sum_j g^(j)(t_next) / l^{j+1} (1 - Q_j(-h l) / Q_R(-h l)).
/// Throws SingularMatrixError if |Q_R(-h l)| < 1e-14, ConfigError for a
/// forced problem with lambda == 0.
double linear_it_step(const LinearScalarProblem& problem, int order, double t_next, double h, double u_n);

/// Explicit Taylor step of order R from t_n:
///   u_{n+1} = Q_R(h l) u_n + sum_j g^(j)(t_n) / l^{j+1} (Q_R(h l) - Q_j(h l)).
double linear_et_step(const LinearScalarProblem& problem, int order, double t_n, double h, double u_n);

// Scalar implicit Taylor in the unscaled jet z_k ~ u^(k)(t_{n+1}), k = 0..R:
//   row 0:    sum_k (-h)^k z_k / k! - u_n
//   row 1:    f(z_0) - z_1
//   row r+1:  (d^r/dt^r f(u))(z) - z_{r+1},   r = 1..R-1

std::vector<double> scalar_it_residual(const ScalarDerivatives& f_derivs, int order, double h, double u_n,
                                       std::span<const double> jet);

/// Jacobian of scalar_it_residual, (R+1) x (R+1).
Matrix scalar_it_jacobian(const ScalarDerivatives& f_derivs, int order, double h, std::span<const double> jet);

struct ScalarStepResult {
  double u = 0.0;
  NewtonStats stats;
};

/// Dense-Newton exact implicit Taylor stepper for u' = f(u), M = 1.
/// Needs f_derivs up to order R.
class ScalarItSolver {
 public:
  ScalarItSolver(ScalarDerivatives f_derivs, int order, NewtonConfig cfg = {});

  ScalarStepResult step(double h, double u_n);
  /// Explicit jet at u: z_0 = u, z_1 = f(u), z_{r+1} by Faa di Bruno.
  std::vector<double> explicit_jet(double u) const;

  int order() const { return order_; }

 private:
  ScalarDerivatives f_derivs_;
  int order_;
  NewtonConfig cfg_;
};

double scalar_it_step(const ScalarDerivatives& f_derivs, int order, double h, double u_n,
                      const NewtonConfig& cfg = {});

}  // namespace taylor
