#pragma once

// Structured solve of the implicit-Taylor Newton system
//
//   [ F00      F0,1:R   ] [ d0   ]     [ F0   ]
//   [ F1:R,0   F1:R,1:R ] [ d1:R ] = - [ F1:R ]
//
// where F1:R,1:R is block lower triangular with -I on the diagonal. Only the
// Schur complement F00 - F0,1:R B needs an LU factorisation.

#include "taylor/linalg.hpp"
#include "taylor/types.hpp"

#include <cstddef>
#include <vector>

namespace taylor {

/// (R+1) x (R+1) grid of M x M blocks. Row 0 is stored in full. For rows
/// k >= 1 only the strictly lower blocks F_{k,l}, l < k, are stored; the
/// diagonal is -I and everything right of it is zero.
class BlockJacobian {
 public:
  BlockJacobian() = default;
  // Row 0 initialised to the AIT structure F00 = I, F0l = -(h/l!) I;
  // lower blocks zero.
  BlockJacobian(int order, int dim, double h);

  /// Restores the freshly constructed state for step `h` without
  /// reallocating the blocks.
  void reset(double h);

  int order() const { return order_; }
  int dim() const { return dim_; }

  Matrix& top(int l) { return top_[static_cast<std::size_t>(l)]; }
  const Matrix& top(int l) const { return top_[static_cast<std::size_t>(l)]; }
  // F_{k,l} for 1 <= k <= R, 0 <= l < k.
  Matrix& lower(int k, int l) { return lower_[index(k, l)]; }
  const Matrix& lower(int k, int l) const { return lower_[index(k, l)]; }

  /// Any block, including the implied -I diagonal and zero upper part.
  Matrix block(int i, int j) const;
  /// The full (R+1)M square matrix. Meant for tests and diagnostics.
  Matrix assemble() const;

 private:
  static std::size_t index(int k, int l) { return static_cast<std::size_t>(k * (k - 1) / 2 + l); }

  int order_ = 0;
  int dim_ = 0;
  std::vector<Matrix> top_;
  std::vector<Matrix> lower_;
};

/// Counts of M x M block products and LU factorisations performed.
struct OpTally {
  std::size_t forward_b_products = 0;
  std::size_t schur_products = 0;
  std::size_t lu_factorizations = 0;

  std::size_t total_products() const { return forward_b_products + schur_products; }
};

/// Expected tallies for one Newton iteration at order R.
OpTally op_count(int order);

/// B_k = -F_{k,0} + sum_{i<k} F_{k,i} B_i, k = 1..R; (R^2 - R)/2 products.
std::vector<Matrix> forward_B(const BlockJacobian& jac, OpTally* tally = nullptr);

/// A_k = -F_k + sum_{i<k} F_{k,i} A_i, k = 1..R. `residual_blocks` holds
/// F_1..F_R (index 0 is F_1).
std::vector<Vector> forward_A(const BlockJacobian& jac, const std::vector<Vector>& residual_blocks);

struct NewtonUpdate {
  Vector delta0;
  std::vector<Vector> delta;  // delta_1..delta_R
  OpTally tally;
};

/// Solves J delta = -F for the stacked residual F = (F_0, ..., F_R). Throws
/// SingularMatrixError when the Schur complement has a pivot below
/// 1e-14 * ||S||_inf.
NewtonUpdate newton_update(const BlockJacobian& jac, const std::vector<Vector>& residual);

/// The same elimination as newton_update on stacked vectors, keeping its
/// B_k, A_k, Schur and LU buffers between calls so repeated Newton
/// iterations at a fixed (R, M) do not reallocate them.
class BlockEliminator {
 public:
  BlockEliminator(int order, int dim);

  /// `residual` and `delta` have length (R+1)M; `delta` is resized.
  void solve(const BlockJacobian& jac, const Vector& residual, Vector& delta, OpTally* tally = nullptr);

 private:
  int order_;
  int dim_;
  std::vector<Matrix> b_;
  std::vector<Vector> a_;
  Matrix schur_;
  Vector rhs_;
  PartialPivLu<double> lu_;
};

}  // namespace taylor
