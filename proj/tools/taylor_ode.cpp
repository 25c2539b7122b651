// taylor-ode: convergence and stability runs for the Taylor integrators.
//
//   taylor-ode bench --problem example3 --method ait --order 4 --steps 80,160,...,10240 --out report.csv
//   taylor-ode compare --problem example4 --order 2 --steps 10,20,...,640 --threshold 1e-3
//   taylor-ode stencil --p 3 --q 2

#include "taylor/bench.hpp"
#include "taylor/stencil.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

namespace {

struct CommonOptions {
  std::string problem;
  int order = 2;
  std::string steps;
  double tol = 1e-13;
  int max_iter = 50;
  std::string norm = "final-l1";
  double horizon = 0.0;
  std::string reference_cache;
  int jobs = 1;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--problem", o.problem, "Problem name (example1..example4)")->required();
  cmd->add_option("--order,-R", o.order, "Taylor order R")->check(CLI::PositiveNumber);
  cmd->add_option("--steps", o.steps, "Step counts, e.g. 10,20,40 or 80,160,...,10240")->required();
  cmd->add_option("--tol", o.tol, "Newton tolerance (relative to 1 + |u_n|)");
  cmd->add_option("--max-iter", o.max_iter, "Newton iteration limit");
  cmd->add_option("--norm", o.norm, "Error norm: final-l1 or max-l1");
  cmd->add_option("--T", o.horizon, "Override the final time");
  cmd->add_option("--reference-cache", o.reference_cache, "File caching computed reference solutions");
  cmd->add_option("--jobs,-j", o.jobs, "Rows integrated concurrently")->check(CLI::PositiveNumber);
}

taylor::RunConfig to_config(const CommonOptions& o) {
  taylor::RunConfig cfg;
  cfg.problem = o.problem;
  cfg.order = o.order;
  cfg.steps = taylor::parse_steps(o.steps);
  cfg.newton.tolerance = o.tol;
  cfg.newton.max_iterations = o.max_iter;
  cfg.norm = taylor::parse_norm(o.norm);
  if (o.horizon > 0.0) cfg.horizon = o.horizon;
  cfg.reference_cache = o.reference_cache;
  cfg.jobs = o.jobs;
  return cfg;
}

void print_report(const taylor::ConvergenceReport& report) {
  std::printf("# %s  (stencil cache: %zu hits, %zu misses)\n", report.label().c_str(), report.stencil_stats.hits,
              report.stencil_stats.misses);
  std::printf("%8s %12s %12s %8s %10s %10s\n", "N", "h", "e(N)", "o(N)", "newton", "seconds");
  for (const auto& row : report.rows) {
    char order[32] = "---";
    if (row.order) std::snprintf(order, sizeof order, "%.2f", *row.order);
    std::printf("%8d %12.4e %12.4e %8s %10ld %10.3e%s%s\n", row.N, row.h, row.error, order, row.newton_iterations,
                row.seconds, row.note.empty() ? "" : "  # ", row.note.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit and implicit approximate Taylor integrators: convergence harness"};
  app.require_subcommand(1);

  CommonOptions bench_opts;
  std::string method = "ait";
  std::string out_path;
  std::string plot_dir;
  auto* bench = app.add_subcommand("bench", "Run one method over a grid of step counts");
  add_common(bench, bench_opts);
  bench->add_option("--method", method, "ait, aet, it-scalar or it-linear");
  bench->add_option("--out", out_path, "CSV output path");
  bench->add_option("--plot-dir", plot_dir, "Directory for plot-ready series data");

  CommonOptions cmp_opts;
  double threshold = 1e-3;
  std::string cmp_dir;
  auto* compare = app.add_subcommand("compare", "Run AIT and AET side by side on the same grid");
  add_common(compare, cmp_opts);
  compare->add_option("--threshold", threshold, "Error level used to compare the methods");
  compare->add_option("--out-dir", cmp_dir, "Directory for the two CSV reports and series data");

  int p = 0;
  int q = 0;
  int stage = 0;
  int stencil_order = 0;
  auto* stencil = app.add_subcommand("stencil", "Print centered finite-difference weights");
  stencil->add_option("--p", p, "Derivative order");
  stencil->add_option("--q", q, "Half the accuracy order");
  stencil->add_option("--k", stage, "Taylor stage (with --R)");
  stencil->add_option("--R", stencil_order, "Method order (with --k)");

  CLI11_PARSE(app, argc, argv);

  try {
    taylor::ProblemRegistry registry;

    if (*bench) {
      taylor::RunConfig cfg = to_config(bench_opts);
      cfg.method = taylor::parse_method(method);
      cfg.output_path = out_path;
      const auto report = taylor::run_grid(cfg, registry);
      print_report(report);
      if (!plot_dir.empty()) {
        const auto manifest = taylor::emit_performance_series({report}, plot_dir);
        std::printf("# series manifest: %s\n", manifest.string().c_str());
      }
      return report.rows.size() == cfg.steps.size() ? 0 : 1;
    }

    if (*compare) {
      const taylor::RunConfig cfg = to_config(cmp_opts);
      const auto cmp = taylor::compare_methods(registry, cfg.problem, cfg.order, cfg.steps, threshold, cfg);
      std::printf("# %s, R=%d\n%s", cfg.problem.c_str(), cfg.order, taylor::format_comparison(cmp).c_str());
      if (!cmp_dir.empty()) {
        std::filesystem::create_directories(cmp_dir);
        taylor::emit_csv(cmp.ait, std::filesystem::path(cmp_dir) / (cmp.ait.label() + ".csv"));
        taylor::emit_csv(cmp.aet, std::filesystem::path(cmp_dir) / (cmp.aet.label() + ".csv"));
        taylor::emit_performance_series({cmp.ait, cmp.aet}, cmp_dir);
      }
      const bool complete = cmp.ait.rows.size() == cfg.steps.size() && cmp.aet.rows.size() == cfg.steps.size();
      return complete ? 0 : 1;
    }

    if (*stencil) {
      taylor::StencilWeights w;
      if (stage > 0 || stencil_order > 0) {
        w = taylor::stencil_for(stage, stencil_order);
      } else {
        w = taylor::make_stencil(p, q);
      }
      std::printf("p=%d q=%d gamma=%d\n", w.derivative_order, w.accuracy_pairs, w.half_width);
      for (int j = -w.half_width; j <= w.half_width; ++j) std::printf("%3d % .17g\n", j, w[j]);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "taylor-ode: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
