#pragma once

#include "taylor/approx_taylor.hpp"
#include "taylor/exact_taylor.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace taylor {

struct ProblemSpec {
  std::string name;
  OdeProblem problem;
  // Scalar derivative chain f^(m)(u), needed by the exact implicit stepper (M = 1).
  ScalarDerivatives f_derivs;
  // Closed-form view for u' = lambda u + g(t).
  std::optional<LinearScalarProblem> linear;
  double reference_T = 1.0;
  std::string notes;
  // Leading state components compared against the exact/reference solution;
  // an autonomised time coordinate is excluded this way.
  int error_components = 0;

  int compared_components() const { return error_components > 0 ? error_components : problem.dim; }
  // Copy with the horizon moved to T.
  ProblemSpec with_horizon(double T) const;
};

/// u' = -5u + 5 sin 2t + 2 cos 2t, u(0) = 0, T = 5, exact sin 2t. Integrated by
/// AET/AIT in autonomous form (u, t) with t' = 1; also carries the linear view.
ProblemSpec example1();
/// u' = log((u + u^3 + u^5) / (1 + u^2 + u^4 + u^6)), u(0) = 1, T = 1.
ProblemSpec example2();
/// Kaps: y' = -1002 y + 1000 z^2, z' = y - z(1 + z), (1, 1), T = 5.
ProblemSpec example3();
/// Stiff linear 3x3 system with eigenvalues -2, -40 +- 40i, (1, 0, -1), T = 5.
ProblemSpec example4();

/// Derivatives of log(p(u)) for a polynomial p with coefficients c[i] of u^i,
/// via the power-series logarithm of p(u + e). Returns d^m/du^m log p at u.
double log_polynomial_derivative(const std::vector<double>& coeffs, int m, double u);

/// Name -> problem lookup, pre-populated with example1..example4.
class ProblemRegistry {
 public:
  ProblemRegistry();

  /// Validates (Jacobian vs. finite differences) and stores `spec`, replacing
  /// any entry with the same name.
  void add(ProblemSpec spec);
  const ProblemSpec& get(const std::string& name) const;
  bool contains(const std::string& name) const { return specs_.count(name) != 0; }
  std::vector<std::string> names() const;

 private:
  std::map<std::string, ProblemSpec> specs_;
};

/// Solution at the problem's T: the exact solution when known, otherwise an
/// AIT R=6, N=20000 run, memoised per (name, T) for the life of the process.
Vector reference_solution(const ProblemSpec& spec);

inline constexpr int kReferenceOrder = 6;
inline constexpr int kReferenceSteps = 20000;

}  // namespace taylor
