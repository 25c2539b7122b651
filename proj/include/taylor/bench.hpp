#pragma once

// Convergence harness: integrate a catalog problem on a list of uniform step
// counts, measure the error at the final time and the observed order
// o(N) = log2(e(N/2) / e(N)).

#include "taylor/problems.hpp"
#include "taylor/stencil.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace taylor {

enum class Method { ait, aet, it_scalar, it_linear };
enum class ErrorNorm { final_l1, max_l1 };

Method parse_method(const std::string& s);
std::string to_string(Method m);
ErrorNorm parse_norm(const std::string& s);
std::string to_string(ErrorNorm n);

/// Parses "10,20,40" or a doubling shorthand "80,160,...,10240".
std::vector<int> parse_steps(const std::string& s);

struct RunConfig {
  std::string problem;
  Method method = Method::ait;
  int order = 2;
  std::vector<int> steps;
  NewtonConfig newton;
  ErrorNorm norm = ErrorNorm::final_l1;
  std::optional<double> horizon;     // overrides the catalog T
  std::string output_path;           // CSV destination, empty for none
  std::string reference_cache;       // file cache for computed reference solutions
  int jobs = 1;                      // rows integrated concurrently
};

struct ReportRow {
  int N = 0;
  double h = 0.0;
  double error = 0.0;                // NaN when the run produced non-finite states or failed
  std::optional<double> order;
  long newton_iterations = 0;
  double seconds = 0.0;
  std::string note;                  // failure reason, if any
};

struct ConvergenceReport {
  RunConfig config;
  std::vector<ReportRow> rows;
  StencilCache::Stats stencil_stats;

  std::string label() const;
};

/// Throws ConfigError for unknown problems, non-positive or unsorted step
/// counts, and method/problem mismatches.
void validate_config(const RunConfig& config, const ProblemRegistry& registry);

/// Runs every N in config.steps. Per-row failures become NaN rows; only
/// configuration errors throw.
ConvergenceReport run_grid(const RunConfig& config, const ProblemRegistry& registry);

/// Fills row.order from the errors: log2(e(N/2) / e(N)) when the N/2 row is
/// present and both errors are finite and positive.
void compute_orders(std::vector<ReportRow>& rows);

/// Reference solution for `spec`, read from or appended to `cache_path`
/// (keyed by a hash of problem name, horizon and reference resolution).
/// An empty path falls back to the in-process memo.
Vector cached_reference(const ProblemSpec& spec, const std::string& cache_path);

// CSV: header `N,h,error,order,newton_iters,seconds`, errors with 6
// significant digits, non-finite errors spelled NaN, blank order when unknown.
void emit_csv(const ConvergenceReport& report, const std::filesystem::path& path);
std::string format_csv(const ConvergenceReport& report);
std::vector<ReportRow> parse_csv(const std::string& text);

/// Writes one `<label>.dat` per report with columns `h error seconds`, NaN
/// rows dropped, plus `manifest.txt` listing `path<TAB>label` per series.
/// Returns the manifest path.
std::filesystem::path emit_performance_series(const std::vector<ConvergenceReport>& reports,
                                              const std::filesystem::path& directory);

struct MethodComparison {
  ConvergenceReport ait;
  ConvergenceReport aet;
  double threshold = 0.0;
  std::optional<int> ait_first_finite;
  std::optional<int> aet_first_finite;
  std::optional<int> ait_first_below;
  std::optional<int> aet_first_below;
};

/// Runs AIT and AET on the same grid and locates the smallest N at which each
/// is finite and below `threshold`.
MethodComparison compare_methods(const ProblemRegistry& registry, const std::string& problem, int order,
                                 const std::vector<int>& steps, double threshold, const RunConfig& base = {});
std::string format_comparison(const MethodComparison& cmp);

/// Least-squares slope of log(error) against log(h) over the last `count`
/// finite rows.
double loglog_slope(const std::vector<ReportRow>& rows, std::size_t count);

}  // namespace taylor
