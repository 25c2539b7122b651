#pragma once

// Faa di Bruno combinatorics: the multi-indices s with sum_v v*s_v = r, their
// multinomial weights, and the resulting expressions for d^r/dt^r f(u(t)).

#include "taylor/types.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace taylor {

struct PartitionIndex {
  std::vector<int> s;       // s[v-1] = multiplicity of part v, v = 1..r
  int order = 0;            // r
  int magnitude = 0;        // |s| = sum of s
  std::uint64_t weight = 0; // r! / (s_1! ... s_r!)
};

/// All s in N_0^r with sum_v v s_v = r. Results are memoised per r.
/// Throws std::invalid_argument for r <= 0.
const std::vector<PartitionIndex>& partitions(int r);

// In the scalar routines below `fvals[m]` holds f^(m)(z_0) and `jet[j]` holds
// z_j (an approximation of u^(j)), with jet[0] = z_0.

/// d^r/dt^r f(u(t)) = sum_s (r over s) f^(|s|)(z_0) prod_j (z_j / j!)^{s_j}.
/// Needs fvals[0..r] and jet[0..r].
double fdb_derivative(int r, std::span<const double> fvals, std::span<const double> jet);
double fdb_derivative(int r, const ScalarDerivatives& f_derivs, std::span<const double> jet);

/// Gradient of fdb_derivative with respect to (z_0, ..., z_r). The z_0 entry
/// raises every |s| by one, so fvals must reach order r+1.
std::vector<double> fdb_partials(int r, std::span<const double> fvals, std::span<const double> jet);
std::vector<double> fdb_partials(int r, const ScalarDerivatives& f_derivs, std::span<const double> jet);

/// The M x |s| matrix whose columns are z_j / j! repeated s_j times, j = 1..r.
/// `jet` holds z_0..z_r as M-vectors (z_0 is not used).
Matrix jet_matrix(const PartitionIndex& s, std::span<const Vector> jet);

/// Action of the k-th derivative tensor of a scalar f : R^M -> R on the
/// columns of an M x k matrix A:
///   sum_{i_1..i_k} d^k f / du_{i_1}..du_{i_k} A(i_1, 0) ... A(i_k, k-1).
/// `partial` receives the index tuple (i_1..i_k) and returns that partial.
using PartialDerivative = std::function<double(std::span<const int>)>;
double tensor_action(const PartialDerivative& partial, const Matrix& a);

/// Faa di Bruno for one scalar component f of a system: `partials_at(k)`
/// returns the order-k partial-derivative accessor evaluated at z_0.
double fdb_derivative(int r, const std::function<PartialDerivative(int)>& partials_at,
                      std::span<const Vector> jet);

}  // namespace taylor
