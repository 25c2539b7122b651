#include "taylor/problems.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace taylor {
namespace {

const std::vector<double> kExample2Numerator = {0.0, 1.0, 0.0, 1.0, 0.0, 1.0};
const std::vector<double> kExample2Denominator = {1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0};

// j-th derivative of amp * sin(2t + phase): amp 2^j sin(2t + phase + j pi/2).
double sin2_deriv(int j, double t, double phase) {
  return std::ldexp(1.0, j) * std::sin(2.0 * t + phase + j * std::numbers::pi / 2.0);
}

double horner(const std::vector<double>& c, double u) {
  double s = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * u + *it;
  return s;
}

double horner_derivative(const std::vector<double>& c, double u) {
  double s = 0.0;
  for (std::size_t i = c.size() - 1; i >= 1; --i) s = s * u + static_cast<double>(i) * c[i];
  return s;
}

double example2_derivative(int m, double u) {
  if (m == 0) return std::log(horner(kExample2Numerator, u) / horner(kExample2Denominator, u));
  if (m == 1) {
    return horner_derivative(kExample2Numerator, u) / horner(kExample2Numerator, u) -
           horner_derivative(kExample2Denominator, u) / horner(kExample2Denominator, u);
  }
  return log_polynomial_derivative(kExample2Numerator, m, u) - log_polynomial_derivative(kExample2Denominator, m, u);
}

}  // namespace

ProblemSpec ProblemSpec::with_horizon(double T) const {
  ProblemSpec out = *this;
  out.problem.T = T;
  out.reference_T = T;
  if (out.linear) out.linear->T = T;
  return out;
}

double log_polynomial_derivative(const std::vector<double>& coeffs, int m, double u) {
  if (m < 0) throw std::invalid_argument("log_polynomial_derivative: negative order");
  const int n = static_cast<int>(coeffs.size());
  // Taylor coefficients a_k of p(u + e) in e, by repeated synthetic division.
  std::vector<double> c(coeffs);
  std::vector<double> a(static_cast<std::size_t>(m + 1), 0.0);
  for (int k = 0; k <= m && k < n; ++k) {
    for (int i = n - 2; i >= k; --i) c[static_cast<std::size_t>(i)] += u * c[static_cast<std::size_t>(i + 1)];
    a[static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(k)];
  }
  if (m == 0) return std::log(a[0]);
  // (log P)' = P'/P  =>  k l_k a_0 = k a_k - sum_{j=1}^{k-1} j l_j a_{k-j}.
  std::vector<double> l(static_cast<std::size_t>(m + 1), 0.0);
  for (int k = 1; k <= m; ++k) {
    double s = k * a[static_cast<std::size_t>(k)];
    for (int j = 1; j < k; ++j) s -= j * l[static_cast<std::size_t>(j)] * a[static_cast<std::size_t>(k - j)];
    l[static_cast<std::size_t>(k)] = s / (k * a[0]);
  }
  return factorial(m) * l[static_cast<std::size_t>(m)];
}

ProblemSpec example1() {
  ProblemSpec spec;
  spec.name = "example1";
  spec.reference_T = 5.0;
  spec.error_components = 1;
  spec.notes = "linear scalar u' = -5u + 5 sin 2t + 2 cos 2t; AET/AIT run on (u, t) with t' = 1";

  LinearScalarProblem lin;
  lin.lambda = -5.0;
  lin.g_deriv = [](int j, double t) {
    return 5.0 * sin2_deriv(j, t, 0.0) + 2.0 * sin2_deriv(j, t, std::numbers::pi / 2.0);
  };
  lin.u0 = 0.0;
  lin.t0 = 0.0;
  lin.T = 5.0;
  lin.exact = [](double t) { return std::sin(2.0 * t); };
  spec.linear = lin;

  OdeProblem& p = spec.problem;
  p.name = spec.name;
  p.dim = 2;
  p.f = [](const Vector& u) {
    Vector out(2);
    out << -5.0 * u(0) + 5.0 * std::sin(2.0 * u(1)) + 2.0 * std::cos(2.0 * u(1)), 1.0;
    return out;
  };
  p.jac = [](const Vector& u) {
    Matrix j(2, 2);
    j << -5.0, 10.0 * std::cos(2.0 * u(1)) - 4.0 * std::sin(2.0 * u(1)), 0.0, 0.0;
    return j;
  };
  p.u0 = Vector::Zero(2);
  p.t0 = 0.0;
  p.T = 5.0;
  p.exact = [](double t) {
    Vector out(2);
    out << std::sin(2.0 * t), t;
    return out;
  };
  return spec;
}

ProblemSpec example2() {
  ProblemSpec spec;
  spec.name = "example2";
  spec.reference_T = 1.0;
  spec.notes = "nonlinear scalar u' = log((u+u^3+u^5)/(1+u^2+u^4+u^6)); reference by AIT R=6, N=20000";
  spec.f_derivs = example2_derivative;

  OdeProblem& p = spec.problem;
  p.name = spec.name;
  p.dim = 1;
  p.f = [](const Vector& u) { return Vector::Constant(1, example2_derivative(0, u(0))); };
  p.jac = [](const Vector& u) { return Matrix::Constant(1, 1, example2_derivative(1, u(0))); };
  p.u0 = Vector::Ones(1);
  p.t0 = 0.0;
  p.T = 1.0;
  return spec;
}

ProblemSpec example3() {
  ProblemSpec spec;
  spec.name = "example3";
  spec.reference_T = 5.0;
  spec.notes = "Kaps problem, stiffness 1000, exact (e^{-2t}, e^{-t})";

  OdeProblem& p = spec.problem;
  p.name = spec.name;
  p.dim = 2;
  p.f = [](const Vector& u) {
    Vector out(2);
    out << -1002.0 * u(0) + 1000.0 * u(1) * u(1), u(0) - u(1) * (1.0 + u(1));
    return out;
  };
  p.jac = [](const Vector& u) {
    Matrix j(2, 2);
    j << -1002.0, 2000.0 * u(1), 1.0, -1.0 - 2.0 * u(1);
    return j;
  };
  p.u0 = Vector::Ones(2);
  p.t0 = 0.0;
  p.T = 5.0;
  p.exact = [](double t) {
    Vector out(2);
    out << std::exp(-2.0 * t), std::exp(-t);
    return out;
  };
  return spec;
}

ProblemSpec example4() {
  ProblemSpec spec;
  spec.name = "example4";
  spec.reference_T = 5.0;
  spec.notes = "stiff linear system, eigenvalues -2 and -40 +- 40i";

  Matrix a(3, 3);
  a << -21.0, 19.0, -20.0, 19.0, -21.0, 20.0, 40.0, -40.0, -40.0;

  OdeProblem& p = spec.problem;
  p.name = spec.name;
  p.dim = 3;
  p.f = [a](const Vector& u) -> Vector { return a * u; };
  p.jac = [a](const Vector&) -> Matrix { return a; };
  p.u0 = Vector(3);
  p.u0 << 1.0, 0.0, -1.0;
  p.t0 = 0.0;
  p.T = 5.0;
  p.exact = [](double t) {
    const double e2 = std::exp(-2.0 * t);
    const double e40 = std::exp(-40.0 * t);
    const double c = std::cos(40.0 * t);
    const double s = std::sin(40.0 * t);
    Vector out(3);
    out << 0.5 * (e2 + e40 * (c + s)), 0.5 * (e2 - e40 * (c + s)), -e40 * (c - s);
    return out;
  };
  return spec;
}

ProblemRegistry::ProblemRegistry() {
  add(example1());
  add(example2());
  add(example3());
  add(example4());
}

void ProblemRegistry::add(ProblemSpec spec) {
  if (spec.name.empty()) throw ConfigError("problem name must not be empty");
  validate_problem(spec.problem);
  if (spec.f_derivs && spec.problem.dim != 1) throw ConfigError("scalar derivative chain given for a system");
  const std::string name = spec.name;
  specs_.insert_or_assign(name, std::move(spec));
}

const ProblemSpec& ProblemRegistry::get(const std::string& name) const {
  auto it = specs_.find(name);
  if (it == specs_.end()) {
    std::string known;
    for (const auto& [n, _] : specs_) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown problem '" + name + "' (known: " + known + ")");
  }
  return it->second;
}

std::vector<std::string> ProblemRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [n, _] : specs_) out.push_back(n);
  return out;
}

Vector reference_solution(const ProblemSpec& spec) {
  const OdeProblem& p = spec.problem;
  if (p.has_exact()) return p.exact(p.T);

  static std::mutex mutex;
  static std::map<std::tuple<std::string, double, double>, Vector> memo;
  const auto key = std::make_tuple(spec.name, p.t0, p.T);
  {
    std::lock_guard lock(mutex);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
  }
  AitSolver solver(p, kReferenceOrder);
  const double h = (p.T - p.t0) / kReferenceSteps;
  // Kahan-compensated accumulation of the step increments keeps the
  // round-off of 20000 steps below the errors being measured.
  Vector u = p.u0;
  Vector carry = Vector::Zero(p.dim);
  for (int n = 0; n < kReferenceSteps; ++n) {
    const Vector y = solver.step(h, u).increment - carry;
    const Vector next = u + y;
    carry = (next - u) - y;
    u = next;
  }

  std::lock_guard lock(mutex);
  memo.emplace(key, u);
  return u;
}

}  // namespace taylor
