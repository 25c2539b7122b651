#include "taylor/bench.hpp"

#include "taylor/approx_taylor.hpp"
#include "taylor/exact_taylor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace taylor {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string sci(double v) {
  if (!std::isfinite(v)) return "NaN";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.5e", v);
  return buf;
}

double parse_double(const std::string& s) {
  const std::string t = trim(s);
  if (t == "NaN" || t == "nan") return kNaN;
  std::size_t pos = 0;
  const double v = std::stod(t, &pos);
  if (pos != t.size()) throw std::invalid_argument("bad number '" + t + "'");
  return v;
}

struct RowOutcome {
  double error = kNaN;
  long iterations = 0;
  std::string note;
};

double l1_head(const Vector& a, const Vector& b, int k) { return (a.head(k) - b.head(k)).lpNorm<1>(); }

RowOutcome integrate(const ProblemSpec& spec, const RunConfig& cfg, int steps, const Vector& reference) {
  const OdeProblem& p = spec.problem;
  const int k = spec.compared_components();
  const double h = (p.T - p.t0) / steps;
  RowOutcome out;
  double max_err = 0.0;

  auto track = [&](const Vector& u, int n) {
    if (cfg.norm == ErrorNorm::max_l1) max_err = std::max(max_err, l1_head(u, p.exact(p.t0 + n * h), k));
  };

  std::function<Vector(const Vector&, int)> advance;
  std::optional<AitSolver> ait;
  std::optional<StencilTable> table;
  std::optional<ScalarItSolver> it;
  Vector u;

  switch (cfg.method) {
    case Method::ait:
      ait.emplace(p, cfg.order, cfg.newton);
      u = p.u0;
      advance = [&](const Vector& x, int) {
        StepResult r = ait->step(h, x);
        out.iterations += r.stats.iterations;
        return r.u;
      };
      break;
    case Method::aet:
      table.emplace(cfg.order);
      u = p.u0;
      advance = [&](const Vector& x, int) { return aet_step(p, *table, h, x); };
      break;
    case Method::it_scalar:
      it.emplace(spec.f_derivs, cfg.order, cfg.newton);
      u = p.u0;
      advance = [&](const Vector& x, int) {
        ScalarStepResult r = it->step(h, x(0));
        out.iterations += r.stats.iterations;
        return Vector::Constant(1, r.u).eval();
      };
      break;
    case Method::it_linear:
      u = Vector::Constant(1, spec.linear->u0);
      advance = [&](const Vector& x, int n) {
        return Vector::Constant(1, linear_it_step(*spec.linear, cfg.order, p.t0 + (n + 1) * h, h, x(0))).eval();
      };
      break;
  }

  try {
    for (int n = 0; n < steps; ++n) {
      u = advance(u, n);
      if (!u.allFinite()) {
        out.note = "non-finite state at step " + std::to_string(n + 1);
        return out;
      }
      track(u, n + 1);
    }
  } catch (const Error& e) {
    out.note = e.what();
    return out;
  }
  out.error = (cfg.norm == ErrorNorm::max_l1) ? max_err : l1_head(u, reference, k);
  if (!std::isfinite(out.error)) out.error = kNaN;
  return out;
}

ReportRow run_row(const ProblemSpec& spec, const RunConfig& cfg, int steps, const Vector& reference) {
  const auto start = std::chrono::steady_clock::now();
  const RowOutcome o = integrate(spec, cfg, steps, reference);
  const auto stop = std::chrono::steady_clock::now();
  ReportRow row;
  row.N = steps;
  row.h = (spec.problem.T - spec.problem.t0) / steps;
  row.error = o.error;
  row.newton_iterations = o.iterations;
  row.seconds = std::chrono::duration<double>(stop - start).count();
  row.note = o.note;
  return row;
}

std::string reference_key(const ProblemSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  os << spec.name << '|' << spec.problem.t0 << '|' << spec.problem.T << '|' << kReferenceOrder << '|'
     << kReferenceSteps;
  std::ostringstream hex;
  hex << std::hex << std::hash<std::string>{}(os.str());
  return hex.str();
}

}  // namespace

Method parse_method(const std::string& s) {
  if (s == "ait") return Method::ait;
  if (s == "aet") return Method::aet;
  if (s == "it-scalar") return Method::it_scalar;
  if (s == "it-linear") return Method::it_linear;
  throw ConfigError("unknown method '" + s + "' (expected ait, aet, it-scalar, it-linear)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::ait: return "ait";
    case Method::aet: return "aet";
    case Method::it_scalar: return "it-scalar";
    case Method::it_linear: return "it-linear";
  }
  return "?";
}

ErrorNorm parse_norm(const std::string& s) {
  if (s == "final-l1") return ErrorNorm::final_l1;
  if (s == "max-l1") return ErrorNorm::max_l1;
  throw ConfigError("unknown error norm '" + s + "' (expected final-l1, max-l1)");
}

std::string to_string(ErrorNorm n) { return n == ErrorNorm::final_l1 ? "final-l1" : "max-l1"; }

std::vector<int> parse_steps(const std::string& s) {
  std::vector<int> out;
  const auto parts = split(s, ',');
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string t = trim(parts[i]);
    if (t == "...") {
      if (out.size() < 2 || i + 1 >= parts.size()) throw ConfigError("'...' needs two leading values and an end value");
      const int a = out[out.size() - 2];
      const int b = out.back();
      const int end = std::stoi(trim(parts[i + 1]));
      if (a <= 0 || b % a != 0 || b / a < 2) throw ConfigError("'...' expects a geometric progression like 80,160,...");
      const int ratio = b / a;
      for (long n = static_cast<long>(b) * ratio; n < end; n *= ratio) out.push_back(static_cast<int>(n));
      continue;
    }
    if (t.empty()) throw ConfigError("empty entry in step list '" + s + "'");
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(t, &pos);
    } catch (const std::exception&) {
      throw ConfigError("bad step count '" + t + "'");
    }
    if (pos != t.size()) throw ConfigError("bad step count '" + t + "'");
    out.push_back(v);
  }
  return out;
}

std::string ConvergenceReport::label() const {
  return config.problem + "_" + to_string(config.method) + "_R" + std::to_string(config.order);
}

void validate_config(const RunConfig& config, const ProblemRegistry& registry) {
  const ProblemSpec& spec = registry.get(config.problem);
  if (config.order < 1) throw ConfigError("order must be >= 1");
  if (config.steps.empty()) throw ConfigError("no step counts given");
  for (std::size_t i = 0; i < config.steps.size(); ++i) {
    if (config.steps[i] <= 0) throw ConfigError("step counts must be positive");
    if (i > 0 && config.steps[i] <= config.steps[i - 1]) throw ConfigError("step counts must be increasing");
  }
  if (config.newton.tolerance <= 0.0 || config.newton.max_iterations < 1) {
    throw ConfigError("Newton tolerance must be positive and max iterations >= 1");
  }
  if (config.horizon && !(*config.horizon > spec.problem.t0)) throw ConfigError("horizon must exceed t0");
  if (config.method == Method::it_scalar && (spec.problem.dim != 1 || !spec.f_derivs)) {
    throw ConfigError("it-scalar needs a scalar problem with a derivative chain; '" + spec.name + "' has none");
  }
  if (config.method == Method::it_linear && !spec.linear) {
    throw ConfigError("it-linear needs a linear scalar problem; '" + spec.name + "' is not one");
  }
  if (config.norm == ErrorNorm::max_l1 && !spec.problem.has_exact()) {
    throw ConfigError("max-l1 needs an exact solution; '" + spec.name + "' has none");
  }
  if (config.jobs < 1) throw ConfigError("jobs must be >= 1");
}

ConvergenceReport run_grid(const RunConfig& config, const ProblemRegistry& registry) {
  validate_config(config, registry);
  ProblemSpec spec = registry.get(config.problem);
  if (config.horizon) spec = spec.with_horizon(*config.horizon);

  Vector reference;
  if (config.norm == ErrorNorm::final_l1) reference = cached_reference(spec, config.reference_cache);

  ConvergenceReport report;
  report.config = config;
  report.rows.resize(config.steps.size());
  if (config.jobs == 1) {
    for (std::size_t i = 0; i < config.steps.size(); ++i) report.rows[i] = run_row(spec, config, config.steps[i], reference);
  } else {
    for (std::size_t first = 0; first < config.steps.size(); first += static_cast<std::size_t>(config.jobs)) {
      const std::size_t last = std::min(config.steps.size(), first + static_cast<std::size_t>(config.jobs));
      std::vector<std::future<ReportRow>> pending;
      for (std::size_t i = first; i < last; ++i) {
        pending.push_back(std::async(std::launch::async, [&, i] { return run_row(spec, config, config.steps[i], reference); }));
      }
      for (std::size_t i = first; i < last; ++i) report.rows[i] = pending[i - first].get();
    }
  }
  compute_orders(report.rows);
  report.stencil_stats = StencilCache::global().stats();

  if (!config.output_path.empty()) emit_csv(report, config.output_path);
  return report;
}

void compute_orders(std::vector<ReportRow>& rows) {
  for (auto& row : rows) {
    row.order.reset();
    if (row.N % 2 != 0 || !(std::isfinite(row.error) && row.error > 0.0)) continue;
    for (const auto& prev : rows) {
      if (prev.N * 2 == row.N && std::isfinite(prev.error) && prev.error > 0.0) {
        row.order = std::log2(prev.error / row.error);
      }
    }
  }
}

Vector cached_reference(const ProblemSpec& spec, const std::string& cache_path) {
  if (cache_path.empty() || spec.problem.has_exact()) return reference_solution(spec);
  const std::string key = reference_key(spec);
  {
    std::ifstream in(cache_path);
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::string k;
      ls >> k;
      if (k != key) continue;
      std::vector<double> vals;
      double v = 0.0;
      while (ls >> v) vals.push_back(v);
      if (static_cast<int>(vals.size()) == spec.problem.dim) {
        return Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
      }
    }
  }
  const Vector ref = reference_solution(spec);
  std::ofstream out(cache_path, std::ios::app);
  if (!out) throw Error("cannot write reference cache '" + cache_path + "'");
  char buf[64];
  out << key;
  for (Eigen::Index i = 0; i < ref.size(); ++i) {
    std::snprintf(buf, sizeof buf, " %.17g", ref(i));
    out << buf;
  }
  out << '\n';
  return ref;
}

std::string format_csv(const ConvergenceReport& report) {
  std::ostringstream os;
  os << "N,h,error,order,newton_iters,seconds\n";
  char buf[64];
  for (const auto& row : report.rows) {
    os << row.N << ',' << sci(row.h) << ',' << sci(row.error) << ',';
    if (row.order) {
      std::snprintf(buf, sizeof buf, "%.6g", *row.order);
      os << buf;
    }
    os << ',' << row.newton_iterations << ',' << sci(row.seconds) << '\n';
  }
  return os.str();
}

void emit_csv(const ConvergenceReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << format_csv(report);
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

std::vector<ReportRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "N,h,error,order,newton_iters,seconds") {
    throw Error("parse_csv: missing or unexpected header");
  }
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) throw Error("parse_csv: expected 6 fields in '" + line + "'");
    ReportRow row;
    row.N = std::stoi(f[0]);
    row.h = parse_double(f[1]);
    row.error = parse_double(f[2]);
    if (!trim(f[3]).empty()) row.order = parse_double(f[3]);
    row.newton_iterations = std::stol(f[4]);
    row.seconds = parse_double(f[5]);
    rows.push_back(row);
  }
  return rows;
}

std::filesystem::path emit_performance_series(const std::vector<ConvergenceReport>& reports,
                                              const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  const auto manifest_path = directory / "manifest.txt";
  std::ofstream manifest(manifest_path);
  if (!manifest) throw Error("cannot open '" + manifest_path.string() + "' for writing");

  for (const auto& report : reports) {
    const std::string label = report.label();
    const auto data_path = directory / (label + ".dat");
    std::ofstream data(data_path);
    if (!data) throw Error("cannot open '" + data_path.string() + "' for writing");
    data << "# h error seconds\n";
    std::size_t dropped = 0;
    for (const auto& row : report.rows) {
      if (!std::isfinite(row.error)) {
        ++dropped;
        continue;
      }
      data << sci(row.h) << ' ' << sci(row.error) << ' ' << sci(row.seconds) << '\n';
    }
    manifest << data_path.string() << '\t' << label << '\n';
    if (dropped > 0) manifest << "# " << label << ": omitted " << dropped << " NaN row(s)\n";
  }
  return manifest_path;
}

MethodComparison compare_methods(const ProblemRegistry& registry, const std::string& problem, int order,
                                 const std::vector<int>& steps, double threshold, const RunConfig& base) {
  RunConfig cfg = base;
  cfg.problem = problem;
  cfg.order = order;
  cfg.steps = steps;
  cfg.output_path.clear();

  MethodComparison cmp;
  cmp.threshold = threshold;
  cfg.method = Method::ait;
  cmp.ait = run_grid(cfg, registry);
  cfg.method = Method::aet;
  cmp.aet = run_grid(cfg, registry);

  auto locate = [&](const ConvergenceReport& r, std::optional<int>& finite, std::optional<int>& below) {
    for (const auto& row : r.rows) {
      if (!finite && std::isfinite(row.error)) finite = row.N;
      if (!below && std::isfinite(row.error) && row.error < threshold) below = row.N;
    }
  };
  locate(cmp.ait, cmp.ait_first_finite, cmp.ait_first_below);
  locate(cmp.aet, cmp.aet_first_finite, cmp.aet_first_below);
  return cmp;
}

std::string format_comparison(const MethodComparison& cmp) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%8s  %12s %8s  %12s %8s\n", "N", "AIT e(N)", "o(N)", "AET e(N)", "o(N)");
  os << buf;
  auto ord = [](const std::optional<double>& o) {
    if (!o) return std::string("---");
    char b[32];
    std::snprintf(b, sizeof b, "%.2f", *o);
    return std::string(b);
  };
  for (std::size_t i = 0; i < cmp.ait.rows.size(); ++i) {
    const auto& a = cmp.ait.rows[i];
    const auto& e = cmp.aet.rows[i];
    std::snprintf(buf, sizeof buf, "%8d  %12s %8s  %12s %8s\n", a.N, sci(a.error).c_str(), ord(a.order).c_str(),
                  sci(e.error).c_str(), ord(e.order).c_str());
    os << buf;
  }
  auto show = [](const std::optional<int>& n) { return n ? std::to_string(*n) : std::string("never"); };
  os << "first finite N:        AIT " << show(cmp.ait_first_finite) << ", AET " << show(cmp.aet_first_finite) << '\n';
  os << "first N below " << sci(cmp.threshold) << ": AIT " << show(cmp.ait_first_below) << ", AET "
     << show(cmp.aet_first_below) << '\n';
  return os.str();
}

double loglog_slope(const std::vector<ReportRow>& rows, std::size_t count) {
  std::vector<const ReportRow*> finite;
  for (const auto& r : rows) {
    if (std::isfinite(r.error) && r.error > 0.0) finite.push_back(&r);
  }
  if (finite.size() < 2) return kNaN;
  const std::size_t n = std::min(count, finite.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = finite.size() - n; i < finite.size(); ++i) {
    const double x = std::log(finite[i]->h);
    const double y = std::log(finite[i]->error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

}  // namespace taylor
