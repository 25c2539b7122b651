#pragma once

#include "taylor/types.hpp"

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

namespace taylor {

/// Centered finite-difference weights for the p-th derivative on a unit grid,
/// accurate to order 2q. `weights[j + half_width]` multiplies y(x + j h).
struct StencilWeights {
  int derivative_order = 0;
  int accuracy_pairs = 0;
  int half_width = 0;
  std::vector<double> weights;

  double operator[](int j) const { return weights[static_cast<std::size_t>(j + half_width)]; }
  int width() const { return 2 * half_width + 1; }
};

// Minimal symmetric half-width for a p-th derivative of order 2q.
constexpr int stencil_half_width(int p, int q) { return (p + 1) / 2 + q - 1; }

/// Solves the moment system sum_j w_j j^m = p! [m == p], m = 0..2*gamma, in
/// long double. Throws std::invalid_argument for p < 1 or q < 1.
StencilWeights make_stencil(int p, int q);

/// Stencil used for the (k+1)-th Taylor term of an order-R method:
/// make_stencil(k, ceil((R - k) / 2)). Requires 1 <= k <= R - 1.
StencilWeights stencil_for(int k, int order);

/// Process-wide memo of make_stencil results. Lookups are mutex-guarded;
/// returned pointers stay valid for the lifetime of the program.
class StencilCache {
 public:
  struct Stats {
    std::size_t hits = 0;
    std::size_t misses = 0;
  };

  static StencilCache& global();

  std::shared_ptr<const StencilWeights> get(int p, int q);
  Stats stats() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::pair<int, int>, std::shared_ptr<const StencilWeights>> table_;
  Stats stats_;
};

/// The stencils for Taylor stages k = 1..R-1 of an order-R method, built
/// eagerly so a stepper never touches the shared cache in its inner loop.
class StencilTable {
 public:
  explicit StencilTable(int order);

  int order() const { return order_; }
  // Stencil approximating the k-th derivative, 1 <= k <= R-1.
  const StencilWeights& stage(int k) const { return *stages_.at(static_cast<std::size_t>(k - 1)); }

 private:
  int order_;
  std::vector<std::shared_ptr<const StencilWeights>> stages_;
};

}  // namespace taylor
