#include "taylor/approx_taylor.hpp"

#include "newton_driver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace taylor {
namespace {

void check_order(int order) {
  if (order < 1) throw std::invalid_argument("Taylor order must be >= 1, got " + std::to_string(order));
}

void check_state(const OdeProblem& problem, const Vector& u) {
  if (u.size() != problem.dim) throw std::invalid_argument("state dimension does not match problem");
}

// The jet z_0..z_R viewed as the columns of an M x (R+1) matrix.
using JetColumns = Eigen::Map<const Matrix>;

JetColumns jet_columns(const Vector& stacked, int dim) {
  return JetColumns(stacked.data(), dim, stacked.size() / dim);
}

// arg = z_0 + s * sum_{l=1}^{k-1} j^l / l! * z_l.
void taylor_argument(detail::AitScratch& w, const JetColumns& jet, double s, int j, int k) {
  w.coef.resize(k - 1);
  double c = s;
  for (int l = 1; l <= k - 1; ++l) {
    c *= static_cast<double>(j) / l;
    w.coef(l - 1) = c;
  }
  w.arg.resize(jet.rows());
  for (Eigen::Index r = 0; r < jet.rows(); ++r) {
    double acc = jet(r, 0);
    for (int l = 1; l <= k - 1; ++l) acc += w.coef(l - 1) * jet(r, l);
    w.arg(r) = acc;
  }
}

// Row k >= 2 of the stage recursion, written into `sum`:
// sum_j beta_j^{k-1,R} f(z_0 + s sum_l j^l/l! z_l). `f_base` is f(z_0),
// reused for the j = 0 node.
template <typename Out>
void stage_sum(const OdeProblem& problem, const StencilWeights& st, const JetColumns& jet, const Vector& f_base,
               double s, int k, detail::AitScratch& w, Out&& sum) {
  sum.setZero();
  for (int j = -st.half_width; j <= st.half_width; ++j) {
    const double beta = st[j];
    if (beta == 0.0) continue;
    if (j == 0) {
      sum.noalias() += beta * f_base;
    } else {
      taylor_argument(w, jet, s, j, k);
      sum.noalias() += beta * problem.f(w.arg);
    }
  }
}

// AIT residual at the stacked jet `z` into `res`.
void fill_ait_residual(const OdeProblem& problem, const StencilTable& table, double h, const Vector& u_n,
                       const Vector& z, Vector& res, detail::AitScratch& w) {
  const int order = table.order();
  const int m = problem.dim;
  const JetColumns jet = jet_columns(z, m);
  res.resize(z.size());
  w.z0 = jet.col(0);

  auto r0 = res.head(m);
  r0.setZero();
  for (int k = order; k >= 1; --k) r0.noalias() += jet.col(k) / factorial(k);
  r0 = (w.z0 - u_n) - h * r0;

  const Vector f0 = problem.f(w.z0);
  res.segment(m, m) = f0 - jet.col(1);
  for (int k = 2; k <= order; ++k) {
    auto rk = res.segment(k * m, m);
    stage_sum(problem, table.stage(k - 1), jet, f0, -h, k, w, rk);
    rk -= jet.col(k);
  }
}

// Lower blocks of the AIT Jacobian at `z` into `out`, whose row 0 and zeroed
// lower part must already be set up for step h.
void fill_ait_jacobian(const OdeProblem& problem, const StencilTable& table, double h, const Vector& z,
                       BlockJacobian& out, detail::AitScratch& w) {
  const int order = table.order();
  const int m = problem.dim;
  const JetColumns jet = jet_columns(z, m);
  w.z0 = jet.col(0);
  const Matrix j0 = problem.jac(w.z0);
  out.lower(1, 0) = j0;
  for (int k = 2; k <= order; ++k) {
    const StencilWeights& st = table.stage(k - 1);
    Matrix& fk0 = out.lower(k, 0);
    for (int j = -st.half_width; j <= st.half_width; ++j) {
      const double beta = st[j];
      if (beta == 0.0) continue;
      if (j == 0) {
        w.jj = j0;
      } else {
        taylor_argument(w, jet, -h, j, k);
        w.jj = problem.jac(w.arg);
      }
      fk0.noalias() += beta * w.jj;
      // d/dz_l of f(z_0 - h sum_m j^m/m! z_m) = -h j^l/l! f'(.)
      double coef = -h * beta;
      for (int l = 1; l <= k - 1; ++l) {
        coef *= static_cast<double>(j) / l;
        out.lower(k, l).noalias() += coef * w.jj;
      }
    }
  }
}

// w_0 = base, w_1 = f(base), w_k = stage_sum(k), stacked into `out`. With
// s = h these are w_k = h^{k-1} v^(k); with s = -h they are the AIT
// unknowns z_k.
void stage_values(const OdeProblem& problem, const StencilTable& table, double s, const Vector& base, Vector& out,
                  detail::AitScratch& w) {
  const int order = table.order();
  const int m = problem.dim;
  out.setZero((order + 1) * m);
  out.head(m) = base;
  const Vector f0 = problem.f(base);
  out.segment(m, m) = f0;
  // Row k only reads columns 0..k-1, which are already final.
  for (int k = 2; k <= order; ++k) {
    const JetColumns jet = jet_columns(out, m);
    Vector wk(m);
    stage_sum(problem, table.stage(k - 1), jet, f0, s, k, w, wk);
    out.segment(k * m, m) = wk;
  }
}

std::vector<Vector> stage_values(const OdeProblem& problem, const StencilTable& table, double s, const Vector& base) {
  detail::AitScratch w;
  Vector stacked;
  stage_values(problem, table, s, base, stacked, w);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(table.order() + 1));
  for (int k = 0; k <= table.order(); ++k) out.push_back(stacked.segment(k * problem.dim, problem.dim));
  return out;
}

void check_jet(const StencilTable& table, const OdeProblem& problem, const TaylorJet& jet) {
  if (jet.order() != table.order() || jet.dim() != problem.dim) {
    throw std::invalid_argument("TaylorJet shape does not match order/problem");
  }
}

}  // namespace

void validate_problem(const OdeProblem& problem, double rtol) {
  if (problem.dim < 1) throw ConfigError("problem '" + problem.name + "': dimension must be >= 1");
  if (!problem.f || !problem.jac) throw ConfigError("problem '" + problem.name + "': f and jac are required");
  if (problem.u0.size() != problem.dim) throw ConfigError("problem '" + problem.name + "': u0 has wrong dimension");
  if (!(problem.T > problem.t0)) throw ConfigError("problem '" + problem.name + "': T must exceed t0");

  const Vector& u = problem.u0;
  const Vector fu = problem.f(u);
  const Matrix jac = problem.jac(u);
  if (fu.size() != problem.dim || jac.rows() != problem.dim || jac.cols() != problem.dim) {
    throw ConfigError("problem '" + problem.name + "': f or jac returned the wrong shape");
  }
  for (int c = 0; c < problem.dim; ++c) {
    const double step = 1e-6 * (1.0 + std::abs(u(c)));
    Vector up = u, um = u;
    up(c) += step;
    um(c) -= step;
    const Vector col = (problem.f(up) - problem.f(um)) / (2.0 * step);
    for (int r = 0; r < problem.dim; ++r) {
      if (std::abs(col(r) - jac(r, c)) > rtol * (1.0 + std::abs(jac(r, c)))) {
        throw ConfigError("problem '" + problem.name + "': Jacobian entry (" + std::to_string(r) + "," +
                          std::to_string(c) + ") disagrees with finite differences of f");
      }
    }
  }
}

TaylorJet::TaylorJet(int order, int dim, Vector stacked) : order_(order), dim_(dim), z_(std::move(stacked)) {
  if (z_.size() != (order + 1) * dim) throw std::invalid_argument("TaylorJet: stacked vector has wrong length");
}

std::vector<Vector> aet_derivatives(const OdeProblem& problem, const StencilTable& table, double h,
                                    const Vector& u_n) {
  check_state(problem, u_n);
  if (table.order() >= 2 && h == 0.0) throw std::invalid_argument("aet_derivatives: step must be nonzero");
  auto v = stage_values(problem, table, h, u_n);
  double scale = 1.0;
  for (int k = 2; k <= table.order(); ++k) {
    scale /= h;
    v[static_cast<std::size_t>(k)] *= scale;
  }
  return v;
}

std::vector<Vector> aet_derivatives(const OdeProblem& problem, int order, double h, const Vector& u_n) {
  check_order(order);
  return aet_derivatives(problem, StencilTable(order), h, u_n);
}

Vector aet_step(const OdeProblem& problem, const StencilTable& table, double h, const Vector& u_n) {
  check_state(problem, u_n);
  const auto w = stage_values(problem, table, h, u_n);
  Vector incr = Vector::Zero(problem.dim);
  for (int k = table.order(); k >= 1; --k) incr.noalias() += w[static_cast<std::size_t>(k)] / factorial(k);
  return u_n + h * incr;
}

Vector aet_step(const OdeProblem& problem, int order, double h, const Vector& u_n) {
  check_order(order);
  return aet_step(problem, StencilTable(order), h, u_n);
}

Vector ait_residual(const OdeProblem& problem, const StencilTable& table, double h, const Vector& u_n,
                    const TaylorJet& jet) {
  check_state(problem, u_n);
  check_jet(table, problem, jet);
  Vector res;
  detail::AitScratch w;
  fill_ait_residual(problem, table, h, u_n, jet.stacked(), res, w);
  return res;
}

Vector ait_residual(const OdeProblem& problem, int order, double h, const Vector& u_n, const TaylorJet& jet) {
  check_order(order);
  return ait_residual(problem, StencilTable(order), h, u_n, jet);
}

BlockJacobian ait_jacobian_blocks(const OdeProblem& problem, const StencilTable& table, double h,
                                  const TaylorJet& jet) {
  check_jet(table, problem, jet);
  BlockJacobian out(table.order(), problem.dim, h);
  detail::AitScratch w;
  fill_ait_jacobian(problem, table, h, jet.stacked(), out, w);
  return out;
}

BlockJacobian ait_jacobian_blocks(const OdeProblem& problem, int order, double h, const TaylorJet& jet) {
  check_order(order);
  return ait_jacobian_blocks(problem, StencilTable(order), h, jet);
}

AitSolver::AitSolver(const OdeProblem& problem, int order, NewtonConfig cfg)
    : problem_(problem),
      table_((check_order(order), order)),
      cfg_(cfg),
      jac_(order, std::max(problem.dim, 1), 0.0),
      eliminator_(order, std::max(problem.dim, 1)) {}

TaylorJet AitSolver::initial_guess(double h, const Vector& u_n) const {
  detail::AitScratch w;
  Vector z;
  stage_values(problem_, table_, -h, u_n, z, w);
  return TaylorJet(order(), problem_.dim, std::move(z));
}

StepResult AitSolver::step(double h, const Vector& u_n) {
  check_state(problem_, u_n);
  const int order = table_.order();
  const int m = problem_.dim;
  Vector z;
  stage_values(problem_, table_, -h, u_n, z, scratch_);

  Vector res;
  auto residual = [&](const Vector& zz) -> const Vector& {
    fill_ait_residual(problem_, table_, h, u_n, zz, res, scratch_);
    return res;
  };
  auto update = [&](const Vector& zz, const Vector& f) -> const Vector& {
    jac_.reset(h);
    fill_ait_jacobian(problem_, table_, h, zz, jac_, scratch_);
    eliminator_.solve(jac_, f, scratch_.delta);
    return scratch_.delta;
  };

  StepResult out;
  out.stats = detail::newton_iterate(z, m, 1.0 + u_n.lpNorm<Eigen::Infinity>(), cfg_, residual, update);
  out.u = z.segment(0, m);
  Vector sum = Vector::Zero(m);
  for (int k = order; k >= 1; --k) sum.noalias() += z.segment(k * m, m) / factorial(k);
  out.increment = h * sum;
  return out;
}

StepResult ait_step(const OdeProblem& problem, int order, double h, const Vector& u_n, const NewtonConfig& cfg) {
  return AitSolver(problem, order, cfg).step(h, u_n);
}

double cost_model(int order, int dim, double beta) {
  const double r = order;
  const double m = dim;
  return ((r * r + r) / 2.0 + 2.0 / 3.0) * m * m * m + r * r * beta * m * m;
}

}  // namespace taylor
