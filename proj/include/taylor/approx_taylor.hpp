#pragma once

// Approximate Taylor methods: the derivatives of u(t) are replaced by
// centered finite differences of f along the Taylor polynomial built so far,
// so only f (and f' for the implicit Newton solve) is ever evaluated.

#include "taylor/block_newton.hpp"
#include "taylor/stencil.hpp"
#include "taylor/types.hpp"

#include <string>
#include <vector>

namespace taylor {

/// Autonomous system u' = f(u) on [t0, T].
struct OdeProblem {
  std::string name;
  int dim = 0;
  RhsFunction f;
  JacobianFunction jac;
  Vector u0;
  double t0 = 0.0;
  double T = 1.0;
  std::function<Vector(double)> exact;  // empty when no closed form exists

  bool has_exact() const { return static_cast<bool>(exact); }
};

/// Checks shapes and that `jac` matches central differences of `f` at u0 to
/// `rtol` (relative to 1 + |entry|). Throws ConfigError on mismatch.
void validate_problem(const OdeProblem& problem, double rtol = 1e-5);

/// Stacked unknowns z_0..z_R of one implicit step, each an M-vector.
/// z_0 ~ u_{n+1}; z_k ~ (-h)^{k-1} v^(k) for k >= 1.
class TaylorJet {
 public:
  TaylorJet(int order, int dim) : order_(order), dim_(dim), z_(Vector::Zero((order + 1) * dim)) {}
  TaylorJet(int order, int dim, Vector stacked);

  int order() const { return order_; }
  int dim() const { return dim_; }

  auto block(int k) { return z_.segment(k * dim_, dim_); }
  auto block(int k) const { return z_.segment(k * dim_, dim_); }
  Vector& stacked() { return z_; }
  const Vector& stacked() const { return z_; }

 private:
  int order_;
  int dim_;
  Vector z_;
};

/// v^(0..R) of the approximate explicit Taylor method at u_n:
/// v^(0) = u_n, v^(1) = f(u_n), v^(k+1) = h^{-k} sum_j beta_j f(sum_l (jh)^l/l! v^(l)).
/// Requires h != 0 when R >= 2. Non-finite values propagate.
std::vector<Vector> aet_derivatives(const OdeProblem& problem, int order, double h, const Vector& u_n);
std::vector<Vector> aet_derivatives(const OdeProblem& problem, const StencilTable& table, double h, const Vector& u_n);

/// u_{n+1} = sum_k h^k/k! v^(k). Non-finite values propagate.
Vector aet_step(const OdeProblem& problem, int order, double h, const Vector& u_n);
Vector aet_step(const OdeProblem& problem, const StencilTable& table, double h, const Vector& u_n);

/// Stacked F = (F_0, ..., F_R):
///   F_0 = z_0 - h sum_k z_k / k! - u_n
///   F_1 = f(z_0) - z_1
///   F_k = sum_j beta_j^{k-1,R} f(z_0 - h sum_{l<k} j^l/l! z_l) - z_k,  k >= 2
Vector ait_residual(const OdeProblem& problem, const StencilTable& table, double h, const Vector& u_n,
                    const TaylorJet& jet);
Vector ait_residual(const OdeProblem& problem, int order, double h, const Vector& u_n, const TaylorJet& jet);

/// Blocks F_{i,j} = dF_i / dz_j of ait_residual.
BlockJacobian ait_jacobian_blocks(const OdeProblem& problem, const StencilTable& table, double h,
                                  const TaylorJet& jet);
BlockJacobian ait_jacobian_blocks(const OdeProblem& problem, int order, double h, const TaylorJet& jet);

struct StepResult {
  Vector u;
  // h * sum_{k>=1} z_k / k! at the converged jet, i.e. u - u_n before the
  // final rounding of u; lets callers accumulate long runs with compensation.
  Vector increment;
  NewtonStats stats;
};

namespace detail {
// Buffers reused across the residual, Jacobian and elimination of a step.
struct AitScratch {
  Vector z0, arg, coef, delta;
  Matrix jj;
};
}  // namespace detail

/// Approximate implicit Taylor stepper. Owns its stencil table and Newton
/// buffers; one instance must not be shared between threads, distinct
/// instances may. Holds a reference to `problem`, which must outlive the
/// solver.
class AitSolver {
 public:
  AitSolver(const OdeProblem& problem, int order, NewtonConfig cfg = {});

  /// Solves u_n = T~_R(u_{n+1}, -h) by Newton with the block elimination.
  /// Throws StepFailure on non-convergence or SingularMatrixError on a
  /// singular Schur complement.
  StepResult step(double h, const Vector& u_n);

  /// Warm start: z_0 = u_n and z_k from the F_k = 0 rows in order, which is
  /// the (-h)-rescaled explicit derivative jet at u_n.
  TaylorJet initial_guess(double h, const Vector& u_n) const;

  int order() const { return table_.order(); }
  const StencilTable& stencils() const { return table_; }

 private:
  const OdeProblem& problem_;
  StencilTable table_;
  NewtonConfig cfg_;
  BlockJacobian jac_;
  BlockEliminator eliminator_;
  detail::AitScratch scratch_;
};

StepResult ait_step(const OdeProblem& problem, int order, double h, const Vector& u_n, const NewtonConfig& cfg = {});

/// Predicted scalar operations per AIT Newton iteration,
/// ((R^2+R)/2 + 2/3) M^3 + R^2 beta M^2, beta the mean cost of one Jacobian entry.
double cost_model(int order, int dim, double beta);

}  // namespace taylor
