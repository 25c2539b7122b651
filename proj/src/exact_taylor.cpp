#include "taylor/exact_taylor.hpp"

#include "newton_driver.hpp"
#include "taylor/fdb.hpp"
#include "taylor/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace taylor {
namespace {

void check_order(int order) {
  if (order < 1) throw std::invalid_argument("Taylor order must be >= 1, got " + std::to_string(order));
}

void check_jet(int order, std::span<const double> jet) {
  if (jet.size() != static_cast<std::size_t>(order + 1)) {
    throw std::invalid_argument("scalar implicit Taylor: jet must have R+1 entries");
  }
}

std::vector<double> derivative_values(const ScalarDerivatives& f_derivs, int max_order, double z0) {
  std::vector<double> fvals(static_cast<std::size_t>(max_order + 1));
  for (int m = 0; m <= max_order; ++m) fvals[static_cast<std::size_t>(m)] = f_derivs(m, z0);
  return fvals;
}

}  // namespace

double linear_it_step(const LinearScalarProblem& problem, int order, double t_next, double h, double u_n) {
  check_order(order);
  const double x = -h * problem.lambda;
  const double qr = q_eval(order, x);
  if (std::abs(qr) < 1e-14) throw SingularMatrixError("implicit Taylor amplification is singular: Q_R(-h lambda) ~ 0");
  double u = u_n / qr;
  if (!problem.forced()) return u;
  if (problem.lambda == 0.0) throw ConfigError("forced linear closed form requires lambda != 0");

  double lpow = 1.0;
  for (int j = 0; j < order; ++j) {
    lpow *= problem.lambda;
    u -= problem.g_deriv(j, t_next) / lpow * (1.0 - q_eval(j, x) / qr);
  }
  return u;
}

double linear_et_step(const LinearScalarProblem& problem, int order, double t_n, double h, double u_n) {
  check_order(order);
  const double x = h * problem.lambda;
  const double qr = q_eval(order, x);
  double u = qr * u_n;
  if (!problem.forced()) return u;
  if (problem.lambda == 0.0) throw ConfigError("forced linear closed form requires lambda != 0");

  double lpow = 1.0;
  for (int j = 0; j < order; ++j) {
    lpow *= problem.lambda;
    u += problem.g_deriv(j, t_n) / lpow * (qr - q_eval(j, x));
  }
  return u;
}

std::vector<double> scalar_it_residual(const ScalarDerivatives& f_derivs, int order, double h, double u_n,
                                       std::span<const double> jet) {
  check_order(order);
  check_jet(order, jet);
  const auto fvals = derivative_values(f_derivs, order - 1, jet[0]);

  std::vector<double> res(static_cast<std::size_t>(order + 1));
  double row0 = -u_n;
  double coef = 1.0;
  for (int k = 0; k <= order; ++k) {
    row0 += coef * jet[static_cast<std::size_t>(k)];
    coef *= -h / (k + 1);
  }
  res[0] = row0;
  res[1] = fvals[0] - jet[1];
  for (int r = 1; r <= order - 1; ++r) {
    res[static_cast<std::size_t>(r + 1)] = fdb_derivative(r, fvals, jet) - jet[static_cast<std::size_t>(r + 1)];
  }
  return res;
}

Matrix scalar_it_jacobian(const ScalarDerivatives& f_derivs, int order, double h, std::span<const double> jet) {
  check_order(order);
  check_jet(order, jet);
  const auto fvals = derivative_values(f_derivs, order, jet[0]);

  Matrix jac = Matrix::Zero(order + 1, order + 1);
  double coef = 1.0;
  for (int k = 0; k <= order; ++k) {
    jac(0, k) = coef;
    coef *= -h / (k + 1);
  }
  jac(1, 0) = fvals[1];
  jac(1, 1) = -1.0;
  for (int r = 1; r <= order - 1; ++r) {
    const auto grad = fdb_partials(r, fvals, jet);
    for (int c = 0; c <= r; ++c) jac(r + 1, c) = grad[static_cast<std::size_t>(c)];
    jac(r + 1, r + 1) = -1.0;
  }
  return jac;
}

ScalarItSolver::ScalarItSolver(ScalarDerivatives f_derivs, int order, NewtonConfig cfg)
    : f_derivs_(std::move(f_derivs)), order_(order), cfg_(cfg) {
  check_order(order);
  if (!f_derivs_) throw std::invalid_argument("ScalarItSolver: derivative callable is empty");
}

std::vector<double> ScalarItSolver::explicit_jet(double u) const {
  const auto fvals = derivative_values(f_derivs_, order_ - 1, u);
  std::vector<double> jet(static_cast<std::size_t>(order_ + 1), 0.0);
  jet[0] = u;
  jet[1] = fvals[0];
  for (int r = 1; r <= order_ - 1; ++r) jet[static_cast<std::size_t>(r + 1)] = fdb_derivative(r, fvals, jet);
  return jet;
}

ScalarStepResult ScalarItSolver::step(double h, double u_n) {
  const auto guess = explicit_jet(u_n);
  Vector z = Eigen::Map<const Vector>(guess.data(), static_cast<Eigen::Index>(guess.size()));

  auto residual = [&](const Vector& zz) {
    const auto r = scalar_it_residual(f_derivs_, order_, h, u_n, {zz.data(), static_cast<std::size_t>(zz.size())});
    return Vector(Eigen::Map<const Vector>(r.data(), static_cast<Eigen::Index>(r.size())));
  };
  auto update = [&](const Vector& zz, const Vector& f) -> Vector {
    const Matrix jac = scalar_it_jacobian(f_derivs_, order_, h, {zz.data(), static_cast<std::size_t>(zz.size())});
    return -PartialPivLu<double>(jac).solve(f);
  };

  ScalarStepResult out;
  out.stats = detail::newton_iterate(z, 1, 1.0 + std::abs(u_n), cfg_, residual, update);
  out.u = z(0);
  return out;
}

double scalar_it_step(const ScalarDerivatives& f_derivs, int order, double h, double u_n, const NewtonConfig& cfg) {
  return ScalarItSolver(f_derivs, order, cfg).step(h, u_n).u;
}

}  // namespace taylor
