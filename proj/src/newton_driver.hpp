#pragma once

#include "taylor/types.hpp"

#include <cmath>
#include <string>

namespace taylor::detail {

// Full-step Newton on a stacked unknown whose first `output_size` entries are
// the step result. Converged when the max-norm of the residual drops to
// tolerance * residual_scale, or when every component of the last update is
// below tolerance * (1 + |z_i|). A residual that stalls at round-off (rows
// that cancel large f values) is accepted once the output entries moved by
// less than tolerance * (1 + |z_i|) and the residual stopped contracting.
// `update(z, F)` returns delta with J delta = -F.
template <typename Residual, typename Update>
NewtonStats newton_iterate(Vector& z, Eigen::Index output_size, double residual_scale, const NewtonConfig& cfg,
                           Residual&& residual, Update&& update) {
  NewtonStats stats;
  Vector f = residual(z);
  double res = f.lpNorm<Eigen::Infinity>();
  int growth = 0;

  auto fail = [&](const std::string& why) {
    stats.final_residual = res;
    stats.converged = false;
    throw StepFailure("Newton failed after " + std::to_string(stats.iterations) + " iterations: " + why +
                          " (residual " + std::to_string(res) + ")",
                      stats, z);
  };

  for (;;) {
    if (!std::isfinite(res)) fail("non-finite residual");
    if (res <= cfg.tolerance * residual_scale) break;
    if (stats.iterations >= cfg.max_iterations) fail("iteration limit reached");

    const Vector& delta = update(z, f);
    z += delta;
    ++stats.iterations;
    const auto small = delta.array().abs() <= cfg.tolerance * (1.0 + z.array().abs());
    const bool small_step = small.all();
    const bool small_output = small.head(output_size).all();

    f = residual(z);
    const double next = f.lpNorm<Eigen::Infinity>();
    const bool stalled = small_output && next > 0.5 * res;
    growth = (next > res) ? growth + 1 : 0;
    res = next;
    if ((small_step || stalled) && std::isfinite(res)) break;
    if (growth >= cfg.divergence_window) fail("residual grew on consecutive iterations");
  }
  stats.final_residual = res;
  stats.converged = true;
  return stats;
}

}  // namespace taylor::detail
