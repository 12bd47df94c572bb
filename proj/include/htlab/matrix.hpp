#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "htlab/dist.hpp"
#include "htlab/errors.hpp"
#include "htlab/rng.hpp"

namespace htlab::mat {

/// Dense symmetric matrix storing the upper triangle (diagonal included)
/// row-major. Indices are 0-based throughout.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;

  explicit SymmetricMatrix(std::size_t n, double fill = 0.0)
      : n_(n), upper_(n * (n + 1) / 2, fill) {}

  /// Build from full rows; the rows must form a symmetric matrix.
  SymmetricMatrix(std::initializer_list<std::initializer_list<double>> rows)
      : SymmetricMatrix(rows.size()) {
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != n_) throw invalid_law("matrix rows must have length n");
      std::size_t j = 0;
      for (double v : row) {
        if (j >= i) at(i, j) = v;
        ++j;
      }
      ++i;
    }
    i = 0;
    for (const auto& row : rows) {
      std::size_t j = 0;
      for (double v : row) {
        if (j < i && v != (*this)(i, j))
          throw invalid_law("matrix initializer is not symmetric");
        ++j;
      }
      ++i;
    }
  }

  std::size_t n() const { return n_; }

  std::size_t entry_count() const { return upper_.size(); }

  /// Position of (i, j), i <= j, in the upper-triangle array.
  std::size_t index(std::size_t i, std::size_t j) const {
    return i * n_ - i * (i - 1) / 2 + (j - i);
  }

  double operator()(std::size_t i, std::size_t j) const {
    return i <= j ? upper_[index(i, j)] : upper_[index(j, i)];
  }

  double& at(std::size_t i, std::size_t j) {
    return i <= j ? upper_[index(i, j)] : upper_[index(j, i)];
  }

  const std::vector<double>& upper() const { return upper_; }
  std::vector<double>& upper() { return upper_; }

  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t s) { seed_ = s; }

  /// Full row-major n x n copy, for dense linear algebra.
  std::vector<double> dense() const {
    std::vector<double> full(n_ * n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i; j < n_; ++j)
        full[i * n_ + j] = full[j * n_ + i] = upper_[index(i, j)];
    return full;
  }

  bool operator==(const SymmetricMatrix& o) const {
    return n_ == o.n_ && upper_ == o.upper_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> upper_;
  std::uint64_t seed_ = 0;
};

/// One stored upper-triangle entry, i <= j.
struct SparseEntry {
  std::size_t i, j;
  double value;
  bool operator==(const SparseEntry&) const = default;
};

/// Sparse symmetric matrix as an upper-triangle coordinate list, sorted by
/// (i, j), all values nonzero, no duplicates.
struct SparseEntries {
  std::size_t n = 0;
  std::vector<SparseEntry> entries;

  bool operator==(const SparseEntries&) const = default;
};

inline void check(const SparseEntries& s) {
  for (std::size_t k = 0; k < s.entries.size(); ++k) {
    const auto& e = s.entries[k];
    if (e.i > e.j || e.j >= s.n)
      throw invalid_law("sparse entry index out of range or below diagonal");
    if (e.value == 0.0) throw invalid_law("sparse entries must be nonzero");
    if (k > 0) {
      const auto& d = s.entries[k - 1];
      if (d.i > e.i || (d.i == e.i && d.j >= e.j))
        throw invalid_law("sparse entries must be sorted by (i, j) without duplicates");
    }
  }
}

/// Sample the upper triangle (diagonal included) i.i.d. from `law`, in
/// row-major order, so the draw sequence is reproducible from the stream.
inline SymmetricMatrix sample_matrix(const dist::HeavyTailLaw& law, std::size_t n,
                                     Rng& rng) {
  dist::check(law);
  if (n == 0) throw invalid_law("matrix order must be at least 1");
  SymmetricMatrix a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) a.at(i, j) = dist::sample_heavy(law, rng);
  return a;
}

struct MaxEntry {
  double value = 0.0;  // |a_{ij}| at the argmax
  std::size_t i = 0, j = 0;
};

/// Largest |a_{ij}| over the whole matrix with the lexicographically
/// smallest (i, j), i <= j, among ties.
inline MaxEntry max_abs_entry(const SymmetricMatrix& a) {
  if (a.n() == 0) throw invalid_law("empty matrix has no entries");
  MaxEntry best{-1.0, 0, 0};
  for (std::size_t i = 0; i < a.n(); ++i)
    for (std::size_t j = i; j < a.n(); ++j) {
      const double v = std::abs(a(i, j));
      if (v > best.value) best = {v, i, j};
    }
  return best;
}

// ---------------------------------------------------------------------------
// Text formats. Matrices: first line n, then the n(n+1)/2 upper-triangle
// values row-major, one per line. Sparse parts: first line "n m", then m
// lines "i j value" (0-based, i <= j). Values round-trip exactly.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline void save_matrix(std::ostream& os, const SymmetricMatrix& a) {
  os << a.n() << '\n';
  for (double v : a.upper()) os << detail::format_double(v) << '\n';
  if (!os) throw io_error("failed while writing matrix");
}

inline void save_matrix(const std::string& path, const SymmetricMatrix& a) {
  std::ofstream os(path);
  if (!os) throw io_error("cannot open for writing: " + path);
  save_matrix(os, a);
}

inline SymmetricMatrix load_matrix(std::istream& is) {
  long long n = -1;
  if (!(is >> n) || n < 1) throw io_error("matrix file: bad or missing order line");
  SymmetricMatrix a(static_cast<std::size_t>(n));
  for (double& v : a.upper())
    if (!(is >> v)) throw io_error("matrix file: too few entries");
  return a;
}

inline SymmetricMatrix load_matrix(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw io_error("cannot open for reading: " + path);
  return load_matrix(is);
}

inline void save_sparse(std::ostream& os, const SparseEntries& s) {
  os << s.n << ' ' << s.entries.size() << '\n';
  for (const auto& e : s.entries)
    os << e.i << ' ' << e.j << ' ' << detail::format_double(e.value) << '\n';
  if (!os) throw io_error("failed while writing sparse part");
}

inline void save_sparse(const std::string& path, const SparseEntries& s) {
  std::ofstream os(path);
  if (!os) throw io_error("cannot open for writing: " + path);
  save_sparse(os, s);
}

inline SparseEntries load_sparse(std::istream& is) {
  long long n = -1, m = -1;
  if (!(is >> n >> m) || n < 1 || m < 0)
    throw io_error("sparse file: bad header line");
  SparseEntries s{static_cast<std::size_t>(n), {}};
  s.entries.resize(static_cast<std::size_t>(m));
  for (auto& e : s.entries)
    if (!(is >> e.i >> e.j >> e.value))
      throw io_error("sparse file: too few entries");
  check(s);
  return s;
}

inline SparseEntries load_sparse(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw io_error("cannot open for reading: " + path);
  return load_sparse(is);
}

}  // namespace htlab::mat
