#include "taylor/fdb.hpp"

#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

namespace taylor {
namespace {

void enumerate(int r, int part, int remaining, std::vector<int>& s, std::vector<PartitionIndex>& out) {
  if (part == 0) {
    if (remaining != 0) return;
    PartitionIndex p;
    p.s = s;
    p.order = r;
    double denom = 1.0;
    for (int v : s) {
      p.magnitude += v;
      denom *= factorial(v);
    }
    p.weight = static_cast<std::uint64_t>(factorial(r) / denom + 0.5);
    out.push_back(std::move(p));
    return;
  }
  for (int count = remaining / part; count >= 0; --count) {
    s[static_cast<std::size_t>(part - 1)] = count;
    enumerate(r, part - 1, remaining - count * part, s, out);
  }
  s[static_cast<std::size_t>(part - 1)] = 0;
}

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

std::vector<double> collect(const ScalarDerivatives& f_derivs, int max_order, double z0) {
  std::vector<double> fvals(static_cast<std::size_t>(max_order + 1));
  for (int m = 0; m <= max_order; ++m) fvals[static_cast<std::size_t>(m)] = f_derivs(m, z0);
  return fvals;
}

void check_sizes(int r, std::size_t nf, std::size_t nf_needed, std::size_t njet) {
  if (r < 1) throw std::invalid_argument("Faa di Bruno order must be >= 1, got " + std::to_string(r));
  if (nf < nf_needed) throw std::invalid_argument("Faa di Bruno: not enough derivative values");
  if (njet < static_cast<std::size_t>(r + 1)) throw std::invalid_argument("Faa di Bruno: jet too short");
}

}  // namespace

const std::vector<PartitionIndex>& partitions(int r) {
  if (r <= 0) throw std::invalid_argument("partitions: r must be >= 1, got " + std::to_string(r));
  static std::mutex mutex;
  static std::map<int, std::vector<PartitionIndex>> memo;
  std::lock_guard lock(mutex);
  auto it = memo.find(r);
  if (it == memo.end()) {
    std::vector<PartitionIndex> out;
    std::vector<int> s(static_cast<std::size_t>(r), 0);
    enumerate(r, r, r, s, out);
    it = memo.emplace(r, std::move(out)).first;
  }
  return it->second;
}

double fdb_derivative(int r, std::span<const double> fvals, std::span<const double> jet) {
  check_sizes(r, fvals.size(), static_cast<std::size_t>(r + 1), jet.size());
  double sum = 0.0;
  for (const auto& p : partitions(r)) {
    double term = static_cast<double>(p.weight) * fvals[static_cast<std::size_t>(p.magnitude)];
    for (int j = 1; j <= r; ++j) {
      term *= ipow(jet[static_cast<std::size_t>(j)] / factorial(j), p.s[static_cast<std::size_t>(j - 1)]);
    }
    sum += term;
  }
  return sum;
}

double fdb_derivative(int r, const ScalarDerivatives& f_derivs, std::span<const double> jet) {
  if (jet.empty()) throw std::invalid_argument("Faa di Bruno: empty jet");
  return fdb_derivative(r, collect(f_derivs, r, jet[0]), jet);
}

std::vector<double> fdb_partials(int r, std::span<const double> fvals, std::span<const double> jet) {
  check_sizes(r, fvals.size(), static_cast<std::size_t>(r + 2), jet.size());
  std::vector<double> grad(static_cast<std::size_t>(r + 1), 0.0);
  std::vector<double> scaled(static_cast<std::size_t>(r + 1));
  for (int j = 1; j <= r; ++j) scaled[static_cast<std::size_t>(j)] = jet[static_cast<std::size_t>(j)] / factorial(j);

  for (const auto& p : partitions(r)) {
    const double w = static_cast<double>(p.weight);
    double prod = 1.0;
    for (int j = 1; j <= r; ++j) prod *= ipow(scaled[static_cast<std::size_t>(j)], p.s[static_cast<std::size_t>(j - 1)]);
    grad[0] += w * fvals[static_cast<std::size_t>(p.magnitude + 1)] * prod;

    for (int j = 1; j <= r; ++j) {
      const int sj = p.s[static_cast<std::size_t>(j - 1)];
      if (sj == 0) continue;
      double partial = w * fvals[static_cast<std::size_t>(p.magnitude)] * sj / factorial(j);
      for (int i = 1; i <= r; ++i) {
        const int e = p.s[static_cast<std::size_t>(i - 1)] - (i == j ? 1 : 0);
        partial *= ipow(scaled[static_cast<std::size_t>(i)], e);
      }
      grad[static_cast<std::size_t>(j)] += partial;
    }
  }
  return grad;
}

std::vector<double> fdb_partials(int r, const ScalarDerivatives& f_derivs, std::span<const double> jet) {
  if (jet.empty()) throw std::invalid_argument("Faa di Bruno: empty jet");
  return fdb_partials(r, collect(f_derivs, r + 1, jet[0]), jet);
}

Matrix jet_matrix(const PartitionIndex& s, std::span<const Vector> jet) {
  if (jet.size() < static_cast<std::size_t>(s.order + 1)) throw std::invalid_argument("jet_matrix: jet too short");
  const Eigen::Index m = jet[0].size();
  Matrix out(m, s.magnitude);
  Eigen::Index col = 0;
  for (int j = 1; j <= s.order; ++j) {
    for (int i = 0; i < s.s[static_cast<std::size_t>(j - 1)]; ++i) {
      out.col(col++) = jet[static_cast<std::size_t>(j)] / factorial(j);
    }
  }
  return out;
}

double tensor_action(const PartialDerivative& partial, const Matrix& a) {
  const auto m = static_cast<int>(a.rows());
  const auto k = static_cast<int>(a.cols());
  std::vector<int> idx(static_cast<std::size_t>(k), 0);
  double sum = 0.0;
  while (true) {
    double term = partial(idx);
    for (int c = 0; c < k; ++c) term *= a(idx[static_cast<std::size_t>(c)], c);
    sum += term;
    int c = 0;
    while (c < k && ++idx[static_cast<std::size_t>(c)] == m) idx[static_cast<std::size_t>(c++)] = 0;
    if (c == k) break;
  }
  return sum;
}

double fdb_derivative(int r, const std::function<PartialDerivative(int)>& partials_at,
                      std::span<const Vector> jet) {
  if (r < 1) throw std::invalid_argument("Faa di Bruno order must be >= 1");
  double sum = 0.0;
  for (const auto& p : partitions(r)) {
    sum += static_cast<double>(p.weight) * tensor_action(partials_at(p.magnitude), jet_matrix(p, jet));
  }
  return sum;
}

}  // namespace taylor
