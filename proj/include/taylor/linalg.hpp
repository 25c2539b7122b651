#pragma once

// Small dense LU with row pivoting. The Newton systems here are at most a
// few hundred entries, so a straightforward right-looking factorisation is
// all that's needed.

#include "taylor/types.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace taylor {

// Factorisation P*A = L*U stored in place. Templated on the scalar so the
// stencil generator can run it in long double.
template <typename Scalar>
class PartialPivLu {
 public:
  PartialPivLu() = default;

  // Factors `a`. A pivot whose magnitude falls below `pivot_tolerance`
  // raises SingularMatrixError.
  explicit PartialPivLu(const MatrixX<Scalar>& a, Scalar pivot_tolerance = Scalar(1e-300)) {
    compute(a, pivot_tolerance);
  }

  void compute(const MatrixX<Scalar>& a, Scalar pivot_tolerance = Scalar(1e-300)) {
    using std::abs;
    if (a.rows() != a.cols()) throw Error("PartialPivLu: matrix is not square");
    lu_ = a;
    const Eigen::Index n = lu_.rows();
    perm_.resize(static_cast<std::size_t>(n));
    std::iota(perm_.begin(), perm_.end(), Eigen::Index{0});

    for (Eigen::Index k = 0; k < n; ++k) {
      Eigen::Index p = k;
      Scalar best = abs(lu_(k, k));
      for (Eigen::Index i = k + 1; i < n; ++i) {
        if (abs(lu_(i, k)) > best) {
          best = abs(lu_(i, k));
          p = i;
        }
      }
      if (!(best >= pivot_tolerance)) {
        throw SingularMatrixError("singular matrix: pivot " + std::to_string(static_cast<double>(best)) +
                                  " at column " + std::to_string(k));
      }
      if (p != k) {
        lu_.row(k).swap(lu_.row(p));
        std::swap(perm_[static_cast<std::size_t>(k)], perm_[static_cast<std::size_t>(p)]);
      }
      const Scalar pivot = lu_(k, k);
      for (Eigen::Index i = k + 1; i < n; ++i) {
        const Scalar m = lu_(i, k) / pivot;
        lu_(i, k) = m;
        if (m != Scalar(0)) {
          for (Eigen::Index j = k + 1; j < n; ++j) lu_(i, j) -= m * lu_(k, j);
        }
      }
    }
  }

  MatrixX<Scalar> solve(const MatrixX<Scalar>& rhs) const {
    const Eigen::Index n = lu_.rows();
    if (rhs.rows() != n) throw Error("PartialPivLu::solve: dimension mismatch");
    MatrixX<Scalar> x(n, rhs.cols());
    for (Eigen::Index i = 0; i < n; ++i) x.row(i) = rhs.row(perm_[static_cast<std::size_t>(i)]);
    for (Eigen::Index c = 0; c < x.cols(); ++c) substitute(x.col(c));
    return x;
  }

  VectorX<Scalar> solve(const VectorX<Scalar>& rhs) const {
    const Eigen::Index n = lu_.rows();
    if (rhs.size() != n) throw Error("PartialPivLu::solve: dimension mismatch");
    VectorX<Scalar> x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = rhs(perm_[static_cast<std::size_t>(i)]);
    substitute(x);
    return x;
  }

  const MatrixX<Scalar>& packed() const { return lu_; }
  Eigen::Index size() const { return lu_.rows(); }

 private:
  // Forward then back substitution on an already permuted column.
  template <typename Column>
  void substitute(Column&& x) const {
    const Eigen::Index n = lu_.rows();
    for (Eigen::Index i = 1; i < n; ++i) {
      Scalar s = x(i);
      for (Eigen::Index j = 0; j < i; ++j) s -= lu_(i, j) * x(j);
      x(i) = s;
    }
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      Scalar s = x(i);
      for (Eigen::Index j = i + 1; j < n; ++j) s -= lu_(i, j) * x(j);
      x(i) = s / lu_(i, i);
    }
  }

  MatrixX<Scalar> lu_;
  std::vector<Eigen::Index> perm_;
};

// Solves A X = rhs. Throws SingularMatrixError for a pivot below 1e-300.
template <typename Scalar>
MatrixX<Scalar> lu_solve(const MatrixX<Scalar>& a, const MatrixX<Scalar>& rhs) {
  return PartialPivLu<Scalar>(a).solve(rhs);
}

inline Vector lu_solve(const Matrix& a, const Vector& rhs) { return PartialPivLu<double>(a).solve(rhs); }

}  // namespace taylor
