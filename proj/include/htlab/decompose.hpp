#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "htlab/dist.hpp"
#include "htlab/errors.hpp"
#include "htlab/matrix.hpp"

namespace htlab::mat {

enum class Regime { small_alpha, centered_alpha };

struct Thresholds {
  double eta;
  double zeta;
};

/// Truncation exponents (eta, zeta) for the entry split at magnitudes
/// n^{(1+eta)/alpha} and n^{(2-zeta)/alpha}. gamma = 1/p - 1/r, p < r.
///
/// small_alpha:    eta = (1 - alpha gamma) / 2
///                 zeta = min{ (1 - alpha gamma) / 4, 1 - alpha / 2 }
/// centered_alpha: eta as above
///                 zeta = min{ (1 - alpha gamma) / 4,
///                             (1 - alpha / 2) (p - 1) / r }
inline Thresholds default_thresholds(Regime regime, double alpha, double r,
                                     double p) {
  if (!(alpha > 0.0 && alpha < 2.0))
    throw invalid_law("threshold formulas need alpha in (0, 2)");
  if (!(r >= 1.0) || !(p >= 1.0) || !(p < r))
    throw unsupported_regime("threshold formulas need 1 <= p < r");
  const double inv_r = std::isinf(r) ? 0.0 : 1.0 / r;
  const double gamma = 1.0 / p - inv_r;
  const double eta = 0.5 * (1.0 - alpha * gamma);
  double zeta;
  if (regime == Regime::small_alpha) {
    zeta = std::min(0.25 * (1.0 - alpha * gamma), 1.0 - 0.5 * alpha);
  } else {
    zeta = std::min(0.25 * (1.0 - alpha * gamma),
                    (1.0 - 0.5 * alpha) * (p - 1.0) * inv_r);
  }
  if (!(eta > 0.0) || !(zeta > 0.0))
    throw regime_violation("(alpha, r, p) admit no positive truncation exponents");
  return {eta, zeta};
}

/// Entrywise split of a symmetric matrix at t_low = n^{(1+eta)/alpha} and
/// t_high = n^{(2-zeta)/alpha}: |a| <= t_low stays dense, t_low < |a| <=
/// t_high goes to the intermediate coordinate list, |a| > t_high to the
/// large one. The three parts reassemble the input bitwise.
struct Decomposition {
  SymmetricMatrix small;
  SparseEntries inter;
  SparseEntries large;
  double eta = 0.0, zeta = 0.0;
  double t_low = 0.0, t_high = 0.0;
};

inline Decomposition decompose(const SymmetricMatrix& a, double alpha, double eta,
                               double zeta) {
  if (!(alpha > 0.0 && alpha < 2.0))
    throw invalid_law("decompose needs alpha in (0, 2)");
  if (!(zeta > 0.0 && zeta < eta))
    throw regime_violation("decompose needs 0 < zeta < eta");
  const double n = static_cast<double>(a.n());
  Decomposition d;
  d.eta = eta;
  d.zeta = zeta;
  d.t_low = std::pow(n, (1.0 + eta) / alpha);
  d.t_high = std::pow(n, (2.0 - zeta) / alpha);
  if (!(d.t_low <= d.t_high))
    throw regime_violation("threshold ordering violated: t_low > t_high");
  d.small = SymmetricMatrix(a.n());
  d.inter.n = d.large.n = a.n();
  for (std::size_t i = 0; i < a.n(); ++i)
    for (std::size_t j = i; j < a.n(); ++j) {
      const double v = a(i, j);
      const double m = std::abs(v);
      if (m <= d.t_low)
        d.small.at(i, j) = v;
      else if (m <= d.t_high)
        d.inter.entries.push_back({i, j, v});
      else
        d.large.entries.push_back({i, j, v});
    }
  return d;
}

/// Sparse matrix whose k-th heaviest value w_k sits at positions
/// (2k, 2k+1) (0-based) after a recorded sequence of simultaneous
/// row/column transpositions. |w_0| >= |w_1| >= ...
struct PairedSparseMatrix {
  std::size_t n = 0;
  std::vector<double> pairs;
  /// Slot transpositions (applied left to right to the identity placement)
  /// realizing the rearrangement; each swaps a pair of row/column indices
  /// simultaneously, so every matrix norm and the value multiset are
  /// preserved by construction.
  std::vector<std::pair<std::size_t, std::size_t>> swaps;
  /// slot_of[original_index] = position after all swaps.
  std::vector<std::size_t> slot_of;
};

inline void check(const PairedSparseMatrix& p) {
  if (2 * p.pairs.size() > p.n)
    throw invalid_law("paired matrix needs 2m <= n");
  for (std::size_t k = 0; k + 1 < p.pairs.size(); ++k)
    if (std::abs(p.pairs[k]) < std::abs(p.pairs[k + 1]))
      throw invalid_law("paired values must be sorted by magnitude");
  for (double w : p.pairs)
    if (w == 0.0) throw invalid_law("paired values must be nonzero");
}

/// Dense realization of the paired matrix (for small-instance checks).
inline SymmetricMatrix to_matrix(const PairedSparseMatrix& p) {
  SymmetricMatrix a(p.n);
  for (std::size_t k = 0; k < p.pairs.size(); ++k)
    a.at(2 * k, 2 * k + 1) = p.pairs[k];
  return a;
}

/// Rearrange a sparse part with at most one off-diagonal entry per
/// row/column into the paired form, recording the transpositions.
/// Fails with not_pairable when the sparsity pattern collides, a diagonal
/// entry is present, or 2m > n.
inline PairedSparseMatrix compact_large(const SparseEntries& s) {
  check(s);
  const std::size_t n = s.n;
  const std::size_t m = s.entries.size();
  if (2 * m > n)
    throw not_pairable("too many entries to pair: need 2m <= n");
  std::vector<int> uses(n, 0);
  for (const auto& e : s.entries) {
    if (e.i == e.j) throw not_pairable("diagonal entry cannot be paired");
    if (++uses[e.i] > 1 || ++uses[e.j] > 1)
      throw not_pairable("row/column holds more than one entry");
  }

  std::vector<std::size_t> order(m);
  for (std::size_t k = 0; k < m; ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(s.entries[a].value);
    const double mb = std::abs(s.entries[b].value);
    if (ma != mb) return ma > mb;
    const auto& ea = s.entries[a];
    const auto& eb = s.entries[b];
    return std::pair(ea.i, ea.j) < std::pair(eb.i, eb.j);
  });

  PairedSparseMatrix out;
  out.n = n;
  out.pairs.reserve(m);
  std::vector<std::size_t> slot_of(n), orig_at(n);
  for (std::size_t t = 0; t < n; ++t) slot_of[t] = orig_at[t] = t;
  auto swap_slots = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    std::swap(slot_of[orig_at[a]], slot_of[orig_at[b]]);
    std::swap(orig_at[a], orig_at[b]);
    out.swaps.emplace_back(a, b);
  };
  for (std::size_t k = 0; k < m; ++k) {
    const auto& e = s.entries[order[k]];
    swap_slots(2 * k, slot_of[e.i]);
    swap_slots(2 * k + 1, slot_of[e.j]);
    out.pairs.push_back(e.value);
  }
  out.slot_of = std::move(slot_of);
  return out;
}

/// Count and extremal statistics a typical heavy-tailed sample satisfies;
/// the caller compares them against the whp bounds. delta enters the
/// "big entry" cutoff b_n^{3/4 + delta}. b_n is the constant-L scale for
/// the given alpha.
struct TypicalityReport {
  MaxEntry max_abs;
  std::size_t diag_exceed_count = 0;    // diagonal entries >= b_n^{11/20}
  std::size_t rows_with_two_big = 0;    // rows with >= 2 entries of magnitude >= b_n^{3/4+delta}
  double max_truncated_row_sum = 0.0;   // max_i sum_j |a_ij| 1{|a_ij| <= b_n^{3/4+delta}}
  double row_sum_ratio = 0.0;           // max_i sum_j |a_ij| / max_abs
  std::size_t kappa_observed = 0;       // max intermediate entries in one row
  std::size_t large_count = 0;          // entries above t_high (upper triangle)
  double b_n = 0.0;
  double t_low = 0.0, t_high = 0.0;
  double delta = 0.0;
};

inline TypicalityReport diagnostics(const SymmetricMatrix& a, double alpha,
                                    double delta, double eta, double zeta) {
  if (!(delta > 0.0)) throw invalid_law("diagnostics needs delta > 0");
  const auto d = decompose(a, alpha, eta, zeta);
  TypicalityReport rep;
  rep.delta = delta;
  rep.t_low = d.t_low;
  rep.t_high = d.t_high;
  rep.max_abs = max_abs_entry(a);
  rep.b_n = dist::quantile_b_n({.alpha = alpha, .family = dist::SvFamily::constant},
                               a.n());
  const double diag_cut = std::pow(rep.b_n, 11.0 / 20.0);
  const double big_cut = std::pow(rep.b_n, 0.75 + delta);
  const std::size_t n = a.n();
  for (std::size_t i = 0; i < n; ++i) {
    if (a(i, i) >= diag_cut) ++rep.diag_exceed_count;
    std::size_t big = 0;
    double truncated = 0.0, full = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double m = std::abs(a(i, j));
      if (m >= big_cut) ++big;
      if (m <= big_cut) truncated += m;
      full += m;
    }
    if (big >= 2) ++rep.rows_with_two_big;
    rep.max_truncated_row_sum = std::max(rep.max_truncated_row_sum, truncated);
    if (rep.max_abs.value > 0.0)
      rep.row_sum_ratio = std::max(rep.row_sum_ratio, full / rep.max_abs.value);
  }
  std::vector<std::size_t> inter_per_row(n, 0);
  for (const auto& e : d.inter.entries) {
    ++inter_per_row[e.i];
    if (e.j != e.i) ++inter_per_row[e.j];
  }
  for (std::size_t i = 0; i < n; ++i)
    rep.kappa_observed = std::max(rep.kappa_observed, inter_per_row[i]);
  rep.large_count = d.large.entries.size();
  return rep;
}

}  // namespace htlab::mat
