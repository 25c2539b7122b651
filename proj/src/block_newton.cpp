#include "taylor/block_newton.hpp"

#include <stdexcept>

namespace taylor {

BlockJacobian::BlockJacobian(int order, int dim, double h) : order_(order), dim_(dim) {
  if (order < 1 || dim < 1) throw std::invalid_argument("BlockJacobian: order and dim must be >= 1");
  top_.reserve(static_cast<std::size_t>(order + 1));
  top_.push_back(Matrix::Identity(dim, dim));
  for (int l = 1; l <= order; ++l) top_.push_back(-(h / factorial(l)) * Matrix::Identity(dim, dim));
  lower_.assign(static_cast<std::size_t>(order * (order + 1) / 2), Matrix::Zero(dim, dim));
}

void BlockJacobian::reset(double h) {
  top_[0].setIdentity();
  for (int l = 1; l <= order_; ++l) {
    top_[static_cast<std::size_t>(l)].setIdentity();
    top_[static_cast<std::size_t>(l)] *= -(h / factorial(l));
  }
  for (auto& m : lower_) m.setZero();
}

Matrix BlockJacobian::block(int i, int j) const {
  if (i == 0) return top(j);
  if (j < i) return lower(i, j);
  if (j == i) return -Matrix::Identity(dim_, dim_);
  return Matrix::Zero(dim_, dim_);
}

Matrix BlockJacobian::assemble() const {
  const int n = (order_ + 1) * dim_;
  Matrix full(n, n);
  for (int i = 0; i <= order_; ++i) {
    for (int j = 0; j <= order_; ++j) full.block(i * dim_, j * dim_, dim_, dim_) = block(i, j);
  }
  return full;
}

OpTally op_count(int order) {
  OpTally t;
  t.forward_b_products = static_cast<std::size_t>((order * order - order) / 2);
  t.schur_products = static_cast<std::size_t>(order);
  t.lu_factorizations = 1;
  return t;
}

std::vector<Matrix> forward_B(const BlockJacobian& jac, OpTally* tally) {
  const int order = jac.order();
  std::vector<Matrix> b;
  b.reserve(static_cast<std::size_t>(order));
  for (int k = 1; k <= order; ++k) {
    Matrix bk = -jac.lower(k, 0);
    for (int i = 1; i < k; ++i) {
      bk.noalias() += jac.lower(k, i) * b[static_cast<std::size_t>(i - 1)];
      if (tally) ++tally->forward_b_products;
    }
    b.push_back(std::move(bk));
  }
  return b;
}

std::vector<Vector> forward_A(const BlockJacobian& jac, const std::vector<Vector>& residual_blocks) {
  const int order = jac.order();
  if (residual_blocks.size() != static_cast<std::size_t>(order)) {
    throw std::invalid_argument("forward_A: expected R residual blocks");
  }
  std::vector<Vector> a;
  a.reserve(static_cast<std::size_t>(order));
  for (int k = 1; k <= order; ++k) {
    Vector ak = -residual_blocks[static_cast<std::size_t>(k - 1)];
    for (int i = 1; i < k; ++i) ak.noalias() += jac.lower(k, i) * a[static_cast<std::size_t>(i - 1)];
    a.push_back(std::move(ak));
  }
  return a;
}

NewtonUpdate newton_update(const BlockJacobian& jac, const std::vector<Vector>& residual) {
  const int order = jac.order();
  const int m = jac.dim();
  if (residual.size() != static_cast<std::size_t>(order + 1)) {
    throw std::invalid_argument("newton_update: expected R+1 residual blocks");
  }
  Vector stacked((order + 1) * m);
  for (int k = 0; k <= order; ++k) {
    if (residual[static_cast<std::size_t>(k)].size() != m) {
      throw std::invalid_argument("newton_update: residual block has the wrong size");
    }
    stacked.segment(k * m, m) = residual[static_cast<std::size_t>(k)];
  }
  NewtonUpdate out;
  Vector delta;
  BlockEliminator(order, m).solve(jac, stacked, delta, &out.tally);
  out.delta0 = delta.head(m);
  out.delta.reserve(static_cast<std::size_t>(order));
  for (int k = 1; k <= order; ++k) out.delta.push_back(delta.segment(k * m, m));
  return out;
}

BlockEliminator::BlockEliminator(int order, int dim)
    : order_(order),
      dim_(dim),
      b_(static_cast<std::size_t>(order), Matrix(dim, dim)),
      a_(static_cast<std::size_t>(order), Vector(dim)),
      schur_(dim, dim),
      rhs_(dim) {
  if (order < 1 || dim < 1) throw std::invalid_argument("BlockEliminator: order and dim must be >= 1");
}

void BlockEliminator::solve(const BlockJacobian& jac, const Vector& residual, Vector& delta, OpTally* tally) {
  const int order = order_;
  const int m = dim_;
  if (jac.order() != order || jac.dim() != m) throw std::invalid_argument("BlockEliminator: Jacobian shape mismatch");
  if (residual.size() != (order + 1) * m) throw std::invalid_argument("BlockEliminator: residual has wrong length");

  // Forward substitution through the unit-lower block triangle for B_k and A_k.
  for (int k = 1; k <= order; ++k) {
    Matrix& bk = b_[static_cast<std::size_t>(k - 1)];
    Vector& ak = a_[static_cast<std::size_t>(k - 1)];
    bk = -jac.lower(k, 0);
    ak = -residual.segment(k * m, m);
    for (int i = 1; i < k; ++i) {
      bk.noalias() += jac.lower(k, i) * b_[static_cast<std::size_t>(i - 1)];
      ak.noalias() += jac.lower(k, i) * a_[static_cast<std::size_t>(i - 1)];
      if (tally) ++tally->forward_b_products;
    }
  }

  schur_ = jac.top(0);
  rhs_ = residual.head(m);
  for (int l = 1; l <= order; ++l) {
    schur_.noalias() -= jac.top(l) * b_[static_cast<std::size_t>(l - 1)];
    rhs_.noalias() -= jac.top(l) * a_[static_cast<std::size_t>(l - 1)];
    if (tally) ++tally->schur_products;
  }

  const double scale = schur_.cwiseAbs().rowwise().sum().maxCoeff();
  try {
    lu_.compute(schur_, std::max(1e-14 * scale, 1e-300));
  } catch (const SingularMatrixError& e) {
    throw SingularMatrixError(std::string("Newton breakdown: Schur complement is singular (") + e.what() + ")");
  }
  if (tally) ++tally->lu_factorizations;

  delta.resize((order + 1) * m);
  delta.head(m) = -lu_.solve(rhs_);
  for (int k = 1; k <= order; ++k) {
    delta.segment(k * m, m).noalias() = -a_[static_cast<std::size_t>(k - 1)];
    delta.segment(k * m, m).noalias() -= b_[static_cast<std::size_t>(k - 1)] * delta.head(m);
  }
}

}  // namespace taylor
