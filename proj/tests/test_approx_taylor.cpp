#include "oracles.hpp"
#include "taylor/approx_taylor.hpp"
#include "taylor/exact_taylor.hpp"
#include "taylor/problems.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>
#include <vector>

using taylor::Matrix;
using taylor::OdeProblem;
using taylor::TaylorJet;
using taylor::Vector;

namespace {

OdeProblem linear_problem(const Matrix& a) {
  OdeProblem p;
  p.name = "linear";
  p.dim = static_cast<int>(a.rows());
  p.f = [a](const Vector& u) -> Vector { return a * u; };
  p.jac = [a](const Vector&) -> Matrix { return a; };
  p.u0 = Vector::Ones(p.dim);
  return p;
}

OdeProblem scalar_linear(double lambda) { return linear_problem(Matrix::Constant(1, 1, lambda)); }

OdeProblem smooth_problem(const oracle::SmoothSystem& s) {
  OdeProblem p;
  p.name = "smooth";
  p.dim = static_cast<int>(s.b.size());
  p.f = [s](const Vector& u) { return s.f(u); };
  p.jac = [s](const Vector& u) { return s.jac(u); };
  p.u0 = Vector::Zero(p.dim);
  return p;
}

OdeProblem quadratic_problem() {
  OdeProblem p;
  p.name = "u+u^2";
  p.dim = 1;
  p.f = [](const Vector& u) { return (u.array() + u.array().square()).matrix().eval(); };
  p.jac = [](const Vector& u) { return Matrix::Constant(1, 1, 1.0 + 2.0 * u(0)); };
  p.u0 = Vector::Constant(1, 0.5);
  return p;
}

// The AIT equations written directly in the derivative approximants
// v^(k) = z_k / (-h)^{k-1} with step s = -h:
//   u_n = sum_k s^k/k! v^(k),  v^(1) = f(z_0),
//   v^(k+1) = s^{-k} sum_j beta_j f(sum_{l<=k} (j s)^l/l! v^(l)),
// rescaled back into z units. Weights come from the exact-rational oracle.
Vector transcribed_residual(const OdeProblem& p, int order, double h, const Vector& u_n, const Vector& z) {
  const int m = p.dim;
  const double s = -h;
  std::vector<Vector> v(static_cast<std::size_t>(order + 1));
  v[0] = z.head(m);
  for (int k = 1; k <= order; ++k) v[static_cast<std::size_t>(k)] = z.segment(k * m, m) / std::pow(s, k - 1);

  Vector res(m * (order + 1));
  Vector back = -u_n;
  for (int k = 0; k <= order; ++k) back += std::pow(s, k) / taylor::factorial(k) * v[static_cast<std::size_t>(k)];
  res.head(m) = back;
  res.segment(m, m) = p.f(v[0]) - v[1];
  for (int k = 1; k <= order - 1; ++k) {
    const int q = (order - k + 1) / 2;
    const auto w = oracle::lagrange_stencil_values(k, q);
    const int gamma = (k + 1) / 2 + q - 1;
    Vector acc = Vector::Zero(m);
    for (int j = -gamma; j <= gamma; ++j) {
      Vector arg = Vector::Zero(m);
      for (int l = 0; l <= k; ++l) arg += std::pow(j * s, l) / taylor::factorial(l) * v[static_cast<std::size_t>(l)];
      acc += w[static_cast<std::size_t>(j + gamma)] * p.f(arg);
    }
    const Vector vk1 = acc / std::pow(s, k);
    res.segment((k + 1) * m, m) = std::pow(s, k) * (vk1 - v[static_cast<std::size_t>(k + 1)]);
  }
  return res;
}

Vector random_jet(std::mt19937& rng, int order, int dim, double scale = 0.7) {
  return oracle::random_vector(rng, (order + 1) * dim, scale);
}

double run_ait(const OdeProblem& p, int order, int steps) {
  taylor::AitSolver solver(p, order);
  const double h = (p.T - p.t0) / steps;
  Vector u = p.u0;
  for (int n = 0; n < steps; ++n) u = solver.step(h, u).u;
  return (u - p.exact(p.T)).lpNorm<1>();
}

}  // namespace

TEST_CASE("aet_derivatives are exact on u' = lambda u") {
  for (int order = 1; order <= 4; ++order) {
    const auto p = scalar_linear(-2.0);
    const Vector u = Vector::Constant(1, 1.3);
    const auto v = taylor::aet_derivatives(p, order, 0.1, u);
    REQUIRE(v.size() == static_cast<std::size_t>(order + 1));
    for (int k = 0; k <= order; ++k) {
      const double want = std::pow(-2.0, k) * 1.3;
      CHECK(std::abs(v[static_cast<std::size_t>(k)](0) - want) <= 1e-10 * (1.0 + std::abs(want)));
    }
  }
}

TEST_CASE("aet_derivatives R=2 second derivative") {
  const auto p = quadratic_problem();
  const double h = 0.05;
  const Vector u = Vector::Constant(1, 0.4);
  const auto v = taylor::aet_derivatives(p, 2, h, u);
  const Vector fu = p.f(u);
  const Vector want = (p.f(u + h * fu) - p.f(u - h * fu)) / (2.0 * h);
  CHECK(std::abs(v[2](0) - want(0)) <= 1e-14);
}

TEST_CASE("aet_derivatives of a constant field") {
  OdeProblem p;
  p.dim = 2;
  p.f = [](const Vector&) { return Vector::Constant(2, 3.5); };
  p.jac = [](const Vector&) { return Matrix::Zero(2, 2); };
  const auto v = taylor::aet_derivatives(p, 5, 0.2, Vector::Ones(2));
  CHECK(v[1].isApprox(Vector::Constant(2, 3.5)));
  for (int k = 2; k <= 5; ++k) CHECK(v[static_cast<std::size_t>(k)].norm() <= 1e-12);
  CHECK_THROWS_AS(taylor::aet_derivatives(p, 3, 0.0, Vector::Ones(2)), std::invalid_argument);
  CHECK_THROWS_AS(taylor::aet_derivatives(p, 3, 0.1, Vector::Ones(3)), std::invalid_argument);
}

TEST_CASE("aet_step examples") {
  SUBCASE("R=2 against the displayed second-order formula") {
    const auto p = quadratic_problem();
    const double h = 0.1;
    const Vector u = Vector::Constant(1, 0.4);
    const Vector fu = p.f(u);
    const Vector want = u + h * fu + h / 4.0 * (p.f(u + h * fu) - p.f(u - h * fu));
    CHECK(std::abs(taylor::aet_step(p, 2, h, u)(0) - want(0)) <= 1e-15);
  }
  SUBCASE("linear factor Q_R(h lambda)") {
    for (int order = 1; order <= 6; ++order) {
      for (double hl : {-0.5, -2.0, 0.3}) {
        const auto p = scalar_linear(hl / 0.1);
        const double got = taylor::aet_step(p, order, 0.1, Vector::Ones(1))(0);
        CHECK(std::abs(got - taylor::q_eval(order, hl)) <= 1e-12 * (1.0 + std::abs(got)));
      }
    }
  }
  SUBCASE("h = 0 leaves the state unchanged") {
    const auto p = quadratic_problem();
    for (int order = 1; order <= 4; ++order) CHECK(taylor::aet_step(p, order, 0.0, p.u0) == p.u0);
  }
}

TEST_CASE("ait_residual R=2, M=1 rows") {
  const auto p = quadratic_problem();
  const double h = 0.2;
  const Vector un = Vector::Constant(1, 0.45);
  const Vector z = (Vector(3) << 0.5, 0.7, -0.2).finished();
  const Vector r = taylor::ait_residual(p, 2, h, un, TaylorJet(2, 1, z));
  const auto f = [&](double x) { return p.f(Vector::Constant(1, x))(0); };
  CHECK(r(0) == doctest::Approx(z(0) - h * z(1) - h / 2 * z(2) - un(0)));
  CHECK(r(1) == doctest::Approx(f(z(0)) - z(1)));
  CHECK(r(2) == doctest::Approx(0.5 * f(z(0) - h * z(1)) - 0.5 * f(z(0) + h * z(1)) - z(2)));
}

TEST_CASE("ait_residual equals the direct transcription on random jets") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const int dim = 1 + trial % 4;
    const int order = 1 + trial % 6;
    const oracle::SmoothSystem sys(rng, dim);
    const auto p = smooth_problem(sys);
    const Vector z = random_jet(rng, order, dim);
    const Vector un = oracle::random_vector(rng, dim);
    const double h = 0.05 + 0.02 * (trial % 3);
    const Vector got = taylor::ait_residual(p, order, h, un, TaylorJet(order, dim, z));
    const Vector want = transcribed_residual(p, order, h, un, z);
    CAPTURE(order);
    CAPTURE(dim);
    CHECK((got - want).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + want.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("ait_jacobian_blocks R=2, M=1 matrix") {
  const auto p = quadratic_problem();
  const double h = 0.2;
  const Vector z = (Vector(3) << 0.5, 0.7, -0.2).finished();
  const Matrix j = taylor::ait_jacobian_blocks(p, 2, h, TaylorJet(2, 1, z)).assemble();
  const auto fp = [](double x) { return 1.0 + 2.0 * x; };
  Matrix want(3, 3);
  want << 1.0, -h, -h / 2, fp(z(0)), -1.0, 0.0, 0.5 * (fp(z(0) - h * z(1)) - fp(z(0) + h * z(1))),
      -h / 2 * (fp(z(0) - h * z(1)) + fp(z(0) + h * z(1))), -1.0;
  CHECK((j - want).norm() <= 1e-15);
}

TEST_CASE("ait_jacobian_blocks match finite differences of the residual") {
  std::mt19937 rng(32);
  SUBCASE("M=3, R=4") {
    const oracle::SmoothSystem sys(rng, 3);
    const auto p = smooth_problem(sys);
    const Vector z = random_jet(rng, 4, 3);
    const Vector un = oracle::random_vector(rng, 3);
    const double h = 0.1;
    const Matrix j = taylor::ait_jacobian_blocks(p, 4, h, TaylorJet(4, 3, z)).assemble();
    const auto res = [&](const Vector& x) { return taylor::ait_residual(p, 4, h, un, TaylorJet(4, 3, x)); };
    CHECK(oracle::max_relative_gap(j, oracle::fd_jacobian(res, z)) <= 1e-6);
  }
  SUBCASE("random M <= 4, R <= 6") {
    std::uniform_int_distribution<int> rd(1, 6);
    std::uniform_int_distribution<int> md(1, 4);
    for (int trial = 0; trial < 40; ++trial) {
      const int order = rd(rng);
      const int dim = md(rng);
      const oracle::SmoothSystem sys(rng, dim);
      const auto p = smooth_problem(sys);
      const Vector z = random_jet(rng, order, dim);
      const Vector un = oracle::random_vector(rng, dim);
      const double h = 0.02 + 0.2 * std::abs(oracle::random_vector(rng, 1)(0));
      const Matrix j = taylor::ait_jacobian_blocks(p, order, h, TaylorJet(order, dim, z)).assemble();
      const auto res = [&](const Vector& x) { return taylor::ait_residual(p, order, h, un, TaylorJet(order, dim, x)); };
      CAPTURE(order);
      CAPTURE(dim);
      CHECK(oracle::max_relative_gap(j, oracle::fd_jacobian(res, z)) <= 1e-6);
    }
  }
}

TEST_CASE("h = 0: decoupled Jacobian and a trivial step") {
  std::mt19937 rng(33);
  const oracle::SmoothSystem sys(rng, 2);
  const auto p = smooth_problem(sys);
  const auto jac = taylor::ait_jacobian_blocks(p, 3, 0.0, TaylorJet(3, 2, random_jet(rng, 3, 2)));
  for (int l = 1; l <= 3; ++l) CHECK(jac.top(l).isZero());
  const Vector un = oracle::random_vector(rng, 2);
  const auto r = taylor::ait_step(p, 3, 0.0, un);
  CHECK(r.stats.iterations <= 2);
  CHECK((r.u - un).norm() <= 1e-15);
}

TEST_CASE("initial guess is the rescaled explicit jet") {
  const auto p = scalar_linear(-3.0);
  const taylor::AitSolver solver(p, 4);
  const double h = 0.1;
  const auto jet = solver.initial_guess(h, Vector::Constant(1, 2.0));
  CHECK(jet.block(0)(0) == 2.0);
  for (int k = 1; k <= 4; ++k) {
    const double want = std::pow(-h, k - 1) * std::pow(-3.0, k) * 2.0;
    CHECK(jet.block(k)(0) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("converged jet satisfies the residual to tolerance") {
  const auto p = scalar_linear(-7.0);
  const Vector un = Vector::Constant(1, 1.5);
  const auto r = taylor::ait_step(p, 4, 0.1, un);
  CHECK(r.stats.converged);
  CHECK(r.stats.final_residual <= 1e-13 * (1.0 + 1.5));
}

TEST_CASE("ait_step examples") {
  SUBCASE("lambda=-5, h=0.1, R=2") {
    const auto r = taylor::ait_step(scalar_linear(-5.0), 2, 0.1, Vector::Ones(1));
    CHECK(r.u(0) == doctest::Approx(1.0 / 1.625).epsilon(1e-13));
    CHECK((r.increment - (r.u - Vector::Ones(1))).norm() <= 1e-15);
  }
  SUBCASE("Kaps, R=2, N=80") {
    const auto p = taylor::example3().problem;
    const double e80 = run_ait(p, 2, 80);
    const double e40 = run_ait(p, 2, 40);
    CHECK(e80 == doctest::Approx(2.12e-05).epsilon(0.02));
    CHECK(std::log2(e40 / e80) == doctest::Approx(1.93).epsilon(0.03));
  }
  SUBCASE("Example 4, R=5, N=640") {
    const auto p = taylor::example4().problem;
    const double e640 = run_ait(p, 5, 640);
    const double e320 = run_ait(p, 5, 320);
    CHECK(e640 == doctest::Approx(5.79e-16).epsilon(0.05));
    CHECK(std::log2(e320 / e640) == doctest::Approx(4.98).epsilon(0.02));
  }
}

TEST_CASE("R=1 is implicit Euler") {
  const auto p = quadratic_problem();
  const double h = 0.1;
  const Vector un = Vector::Constant(1, 0.5);
  const auto r = taylor::ait_step(p, 1, h, un);
  CHECK(std::abs(r.u(0) - h * p.f(r.u)(0) - un(0)) <= 1e-13);
  const auto quad = [](int m, double u) { return m == 0 ? u + u * u : (m == 1 ? 1.0 + 2.0 * u : (m == 2 ? 2.0 : 0.0)); };
  CHECK(r.u(0) == doctest::Approx(taylor::scalar_it_step(quad, 1, h, 0.5)).epsilon(1e-13));
}

TEST_CASE("reversed explicit map is the implicit fixed point") {
  std::mt19937 rng(34);
  for (int order = 2; order <= 6; ++order) {
    const int dim = 1 + order % 3;
    const oracle::SmoothSystem sys(rng, dim);
    const auto p = smooth_problem(sys);
    const Vector u_next = oracle::random_vector(rng, dim);
    const double h = 0.07;
    const auto v = taylor::aet_derivatives(p, order, -h, u_next);
    Vector u_n = Vector::Zero(dim);
    Vector z((order + 1) * dim);
    for (int k = 0; k <= order; ++k) {
      u_n += std::pow(-h, k) / taylor::factorial(k) * v[static_cast<std::size_t>(k)];
      z.segment(k * dim, dim) = (k == 0 ? 1.0 : std::pow(-h, k - 1)) * v[static_cast<std::size_t>(k)];
    }
    const Vector r = taylor::ait_residual(p, order, h, u_n, TaylorJet(order, dim, z));
    CAPTURE(order);
    CHECK(r.lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("implicit amplification equals 1/Q_R(-h lambda)") {
  for (int order = 1; order <= 6; ++order) {
    for (double hl : {-0.5, -2.0, -50.0}) {
      const double h = 0.1;
      const auto r = taylor::ait_step(scalar_linear(hl / h), order, h, Vector::Ones(1));
      const double want = 1.0 / taylor::q_eval(order, -hl);
      CAPTURE(order);
      CAPTURE(hl);
      CHECK(std::abs(r.u(0) - want) <= 1e-11 * std::abs(want));
    }
  }
}

TEST_CASE("implicit stability function is below one on the negative real axis") {
  for (int order = 1; order <= 6; ++order) {
    for (int k = -2; k <= 3; ++k) {
      const double hl = -std::pow(10.0, k);
      CHECK(std::abs(1.0 / taylor::q_eval(order, -hl)) < 1.0);
    }
  }
}

TEST_CASE("approximate and exact implicit steps differ by O(h^{R+1})") {
  const auto spec = taylor::example2();
  for (int order = 2; order <= 3; ++order) {
    std::vector<double> gaps;
    for (double h : {0.1, 0.05, 0.025}) {
      const double exact = taylor::scalar_it_step(spec.f_derivs, order, h, 1.0);
      const double approx = taylor::ait_step(spec.problem, order, h, Vector::Ones(1)).u(0);
      gaps.push_back(std::abs(exact - approx));
    }
    CAPTURE(order);
    CHECK(std::log2(gaps[1] / gaps[2]) >= order + 1 - 0.3);
  }
}

TEST_CASE("cost_model arithmetic") {
  CHECK(taylor::cost_model(1, 1, 0.0) == doctest::Approx(5.0 / 3.0));
  CHECK(taylor::cost_model(4, 3, 2.0) == doctest::Approx(576.0));
  CHECK(taylor::cost_model(3, 2, 0.0) == doctest::Approx((6.0 + 2.0 / 3.0) * 8.0));
}

TEST_CASE("Newton failure and divergence raise StepFailure") {
  const auto p = taylor::example3().problem;
  taylor::NewtonConfig cfg;
  cfg.max_iterations = 1;
  cfg.tolerance = 1e-16;
  CHECK_THROWS_AS(taylor::ait_step(p, 3, 0.5, p.u0, cfg), taylor::StepFailure);

  OdeProblem blow;
  blow.dim = 1;
  blow.f = [](const Vector& u) { return (u.array().exp()).matrix().eval(); };
  blow.jac = [](const Vector& u) { return Matrix::Constant(1, 1, std::exp(u(0))); };
  // u - h e^u = u_n has no real root for large h.
  CHECK_THROWS_AS(taylor::ait_step(blow, 1, 5.0, Vector::Constant(1, 1.0)), taylor::StepFailure);
}

TEST_CASE("distinct solvers in parallel reproduce the serial result") {
  const auto p = taylor::example3().problem;
  const auto run = [&p] {
    taylor::AitSolver s(p, 4);
    Vector u = p.u0;
    for (int n = 0; n < 200; ++n) u = s.step(0.025, u).u;
    return u;
  };
  const Vector serial = run();
  std::vector<Vector> results(4);
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < results.size(); ++t) threads.emplace_back([&, t] { results[t] = run(); });
  for (auto& th : threads) th.join();
  for (const auto& r : results) CHECK(r == serial);
}

TEST_CASE("validate_problem") {
  auto p = quadratic_problem();
  CHECK_NOTHROW(taylor::validate_problem(p));
  auto bad = p;
  bad.jac = [](const Vector&) { return Matrix::Constant(1, 1, 7.0); };
  CHECK_THROWS_AS(taylor::validate_problem(bad), taylor::ConfigError);
  auto shape = p;
  shape.u0 = Vector::Zero(2);
  CHECK_THROWS_AS(taylor::validate_problem(shape), taylor::ConfigError);
  auto horizon = p;
  horizon.T = horizon.t0;
  CHECK_THROWS_AS(taylor::validate_problem(horizon), taylor::ConfigError);
  auto missing = p;
  missing.jac = nullptr;
  CHECK_THROWS_AS(taylor::validate_problem(missing), taylor::ConfigError);
}

TEST_CASE("TaylorJet shape checks") {
  CHECK_THROWS_AS(TaylorJet(2, 2, Vector::Zero(5)), std::invalid_argument);
  const auto p = quadratic_problem();
  CHECK_THROWS_AS(taylor::ait_residual(p, 3, 0.1, p.u0, TaylorJet(2, 1)), std::invalid_argument);
  CHECK_THROWS_AS(taylor::AitSolver(p, 0), std::invalid_argument);
}
