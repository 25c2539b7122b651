#include "taylor/stencil.hpp"

#include "taylor/linalg.hpp"

#include <stdexcept>
#include <string>

namespace taylor {

StencilWeights make_stencil(int p, int q) {
  if (p < 1) throw std::invalid_argument("make_stencil: derivative order must be >= 1, got " + std::to_string(p));
  if (q < 1) throw std::invalid_argument("make_stencil: accuracy pairs must be >= 1, got " + std::to_string(q));

  const int gamma = stencil_half_width(p, q);
  const int n = 2 * gamma + 1;

  MatrixX<long double> moments(n, n);
  for (int m = 0; m < n; ++m) {
    for (int col = 0; col < n; ++col) {
      long double jm = 1.0L;
      for (int e = 0; e < m; ++e) jm *= static_cast<long double>(col - gamma);
      moments(m, col) = jm;
    }
  }
  VectorX<long double> rhs = VectorX<long double>::Zero(n);
  long double pfact = 1.0L;
  for (int i = 2; i <= p; ++i) pfact *= i;
  rhs(p) = pfact;

  const VectorX<long double> w = PartialPivLu<long double>(moments, 1e-30L).solve(rhs);

  StencilWeights out;
  out.derivative_order = p;
  out.accuracy_pairs = q;
  out.half_width = gamma;
  out.weights.resize(static_cast<std::size_t>(n));
  // Enforce the exact parity w_{-j} = (-1)^p w_j; for odd p this also pins
  // the center weight to 0.
  const long double sign = (p % 2 == 0) ? 1.0L : -1.0L;
  for (int j = 0; j <= gamma; ++j) {
    const long double pos = w(gamma + j);
    const long double neg = w(gamma - j);
    const long double sym = 0.5L * (pos + sign * neg);
    out.weights[static_cast<std::size_t>(gamma + j)] = static_cast<double>(sym);
    out.weights[static_cast<std::size_t>(gamma - j)] = static_cast<double>(sign * sym);
  }
  if (p % 2 == 1) out.weights[static_cast<std::size_t>(gamma)] = 0.0;
  return out;
}

StencilWeights stencil_for(int k, int order) {
  if (k < 1 || k > order - 1) {
    throw std::invalid_argument("stencil_for: stage " + std::to_string(k) + " outside [1, " +
                                std::to_string(order - 1) + "]");
  }
  return make_stencil(k, (order - k + 1) / 2);
}

StencilCache& StencilCache::global() {
  static StencilCache cache;
  return cache;
}

std::shared_ptr<const StencilWeights> StencilCache::get(int p, int q) {
  std::lock_guard lock(mutex_);
  const auto key = std::make_pair(p, q);
  if (auto it = table_.find(key); it != table_.end()) {
    ++stats_.hits;
    return it->second;
  }
  ++stats_.misses;
  auto entry = std::make_shared<const StencilWeights>(make_stencil(p, q));
  table_.emplace(key, entry);
  return entry;
}

StencilCache::Stats StencilCache::stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

StencilTable::StencilTable(int order) : order_(order) {
  if (order < 1) throw std::invalid_argument("StencilTable: order must be >= 1");
  for (int k = 1; k <= order - 1; ++k) {
    stages_.push_back(StencilCache::global().get(k, (order - k + 1) / 2));
  }
}

}  // namespace taylor
