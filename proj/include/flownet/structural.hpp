#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "flownet/linalg.hpp"
#include "flownet/matching.hpp"

namespace flownet {

/// Matrix known only by its zero/nonzero pattern: `free` positions hold
/// independent parameters, `fixed` positions hold pinned nonzero values
/// (identity blocks), everything else is structurally zero.
class StructuredMatrix {
public:
  StructuredMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  void add_free(std::size_t r, std::size_t c) {
    check_bounds(r, c);
    if (fixed_.count({r, c}))
      throw ValidationError("Pattern", "position is already fixed");
    free_.insert({r, c});
  }

  void add_fixed(std::size_t r, std::size_t c, double value) {
    check_bounds(r, c);
    if (value == 0.0)
      throw ValidationError("Pattern", "fixed entries must be nonzero");
    if (free_.count({r, c}))
      throw ValidationError("Pattern", "position is already free");
    fixed_[{r, c}] = value;
  }

  bool is_free(std::size_t r, std::size_t c) const {
    return free_.count({r, c}) > 0;
  }
  bool is_nonzero(std::size_t r, std::size_t c) const {
    return free_.count({r, c}) > 0 || fixed_.count({r, c}) > 0;
  }

  const std::map<std::pair<std::size_t, std::size_t>, double>& fixed() const {
    return fixed_;
  }
  const std::set<std::pair<std::size_t, std::size_t>>& free_positions() const {
    return free_;
  }

  std::size_t nonzero_count() const { return free_.size() + fixed_.size(); }

  /// Random realization: fixed entries keep their value, free entries draw
  /// uniform from [-1,1] with a dead zone around the variety-prone origin.
  Matrix sample(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(rows_),
                            static_cast<Eigen::Index>(cols_));
    for (const auto& [pos, v] : fixed_)
      m(static_cast<Eigen::Index>(pos.first),
        static_cast<Eigen::Index>(pos.second)) = v;
    for (const auto& pos : free_) {
      double v = 0.0;
      do {
        v = dist(rng);
      } while (std::abs(v) < 1e-3);
      m(static_cast<Eigen::Index>(pos.first),
        static_cast<Eigen::Index>(pos.second)) = v;
    }
    return m;
  }

  /// Pattern grid: 'x' free, '1' fixed one, '0' zero; one row per line.
  static StructuredMatrix from_grid(
      const std::vector<std::vector<char>>& grid) {
    if (grid.empty() || grid.front().empty())
      throw ValidationError("Pattern", "empty pattern grid");
    StructuredMatrix s(grid.size(), grid.front().size());
    for (std::size_t r = 0; r < grid.size(); ++r) {
      if (grid[r].size() != grid.front().size())
        throw ValidationError("Pattern", "ragged pattern grid");
      for (std::size_t c = 0; c < grid[r].size(); ++c) {
        switch (grid[r][c]) {
          case 'x':
          case 'X': s.add_free(r, c); break;
          case '1': s.add_fixed(r, c, 1.0); break;
          case '0': break;
          default:
            throw ValidationError("Pattern",
                                  std::string("unexpected pattern symbol '") +
                                      grid[r][c] + "'");
        }
      }
    }
    return s;
  }

private:
  void check_bounds(std::size_t r, std::size_t c) const {
    if (r >= rows_ || c >= cols_)
      throw OutOfRange("pattern position out of bounds");
  }

  std::size_t rows_, cols_;
  std::set<std::pair<std::size_t, std::size_t>> free_;
  std::map<std::pair<std::size_t, std::size_t>, double> fixed_;
};

/// Generic (maximal over parameter values) rank: the maximum matching of
/// the bipartite row-column graph of nonzero positions. Fixed entries are
/// always matchable.
inline int generic_rank(const StructuredMatrix& s) {
  BipartiteMatcher matcher(s.rows(), s.cols());
  for (const auto& pos : s.free_positions())
    matcher.add_edge(pos.first, pos.second);
  for (const auto& [pos, v] : s.fixed()) matcher.add_edge(pos.first, pos.second);
  return matcher.solve();
}

struct FormTResult {
  bool has_form = false;
  int k = 0;  // column count of the witness block
  std::vector<std::size_t> zero_rows;
  std::vector<std::size_t> zero_cols;
  int generic_rank = 0;
};

/// Combinatorial low-rank certificate: an n x s pattern (s >= n) has form
/// (t) exactly when a zero submatrix with (rows + cols) = n + s - t + 1
/// exists, equivalently when the generic rank stays below t. The witness
/// block is the complement of a minimum vertex cover.
inline FormTResult has_form_t(const StructuredMatrix& s, int t) {
  const auto n = static_cast<int>(s.rows());
  const auto cols = static_cast<int>(s.cols());
  if (cols < n)
    throw DimensionMismatch("form-(t) is defined for wide patterns (s >= n)");
  if (t < 1 || t > n) throw OutOfRange("need 1 <= t <= rows");

  BipartiteMatcher matcher(s.rows(), s.cols());
  for (const auto& pos : s.free_positions())
    matcher.add_edge(pos.first, pos.second);
  for (const auto& [pos, v] : s.fixed()) matcher.add_edge(pos.first, pos.second);

  FormTResult res;
  res.generic_rank = matcher.solve();
  if (res.generic_rank >= t) return res;

  std::vector<bool> row_cover, col_cover;
  matcher.vertex_cover(row_cover, col_cover);
  for (std::size_t r = 0; r < s.rows(); ++r)
    if (!row_cover[r]) res.zero_rows.push_back(r);
  for (std::size_t c = 0; c < s.cols(); ++c)
    if (!col_cover[c]) res.zero_cols.push_back(c);
  res.has_form = true;
  res.k = static_cast<int>(res.zero_cols.size());
  return res;
}

struct CertificateCheck {
  bool consistent = false;
  bool form = false;
  int generic_rank = 0;
  int max_sampled_rank = 0;
  int trials = 0;
};

/// Monte-Carlo consistency of the low-rank certificate: over random
/// parameter draws, every sampled rank stays below t exactly when the
/// pattern has form (t).
inline CertificateCheck certificate_consistency(const StructuredMatrix& s, int t,
                                    int trials, std::uint64_t seed = 1234) {
  CertificateCheck chk;
  chk.trials = trials;
  const FormTResult f = has_form_t(s, t);
  chk.form = f.has_form;
  chk.generic_rank = f.generic_rank;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < trials; ++i) {
    const Matrix m = s.sample(rng);
    chk.max_sampled_rank =
        std::max(chk.max_sampled_rank, rank_with_tolerance(m).rank);
  }
  const bool all_below = chk.max_sampled_rank < t;
  chk.consistent = (all_below == chk.form);
  return chk;
}

/// Block pattern deciding structural controllability: m chained block rows
///   [ K  I                      ]
///   [   -A  K  I                ]
///   [          ...              ]
///   [               -A  K  I    ]
///   [                   -A  K   ]
/// with identity blocks fixed and A/K blocks free per their patterns.
struct ExtendedControllabilityMatrix {
  StructuredMatrix pattern;
  std::size_t state_dim = 0;   // m
  std::size_t input_dim = 0;   // N
  std::size_t block_rows = 0;  // m

  std::size_t block_col_offset(std::size_t bc) const {
    const std::size_t pairs = bc / 2;
    if (bc % 2 == 0) return pairs * (input_dim + state_dim);
    return pairs * (input_dim + state_dim) + input_dim;
  }
};

inline ExtendedControllabilityMatrix build_extended_matrix(
    const StructuredMatrix& a_pattern, const StructuredMatrix& k_pattern) {
  const std::size_t m = a_pattern.rows();
  if (a_pattern.cols() != m)
    throw DimensionMismatch("state pattern must be square");
  if (k_pattern.rows() != m)
    throw DimensionMismatch("input pattern must have one row per state");
  const std::size_t n_in = k_pattern.cols();

  const std::size_t total_rows = m * m;
  const std::size_t total_cols = m * n_in + (m - 1) * m;
  ExtendedControllabilityMatrix ext{
      StructuredMatrix(total_rows, total_cols), m, n_in, m};

  auto place_free = [&](const StructuredMatrix& src, std::size_t row0,
                        std::size_t col0) {
    for (const auto& pos : src.free_positions())
      ext.pattern.add_free(row0 + pos.first, col0 + pos.second);
    for (const auto& [pos, v] : src.fixed())
      ext.pattern.add_fixed(row0 + pos.first, col0 + pos.second, v);
  };

  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t row0 = i * m;
    place_free(k_pattern, row0, ext.block_col_offset(2 * i));
    if (i + 1 < m) {
      const std::size_t col0 = ext.block_col_offset(2 * i + 1);
      for (std::size_t d = 0; d < m; ++d)
        ext.pattern.add_fixed(row0 + d, col0 + d, 1.0);
    }
    if (i >= 1) place_free(a_pattern, row0, ext.block_col_offset(2 * i - 1));
  }
  return ext;
}

struct StructuralVerdict {
  bool controllable = false;
  int generic_rank = 0;
  int target_rank = 0;  // full row rank of the extended pattern
  FormTResult form;     // witness when not controllable
  bool oracle_agrees = true;
  int oracle_max_kalman_rank = 0;
  int oracle_trials = 0;
};

/// Numeric realization of the extended matrix for one parameter draw; the
/// repeated -A blocks share the same sampled matrix.
inline Matrix realize_extended(const ExtendedControllabilityMatrix& ext,
                               const Matrix& a, const Matrix& k) {
  const auto m = static_cast<Eigen::Index>(ext.state_dim);
  const auto n_in = static_cast<Eigen::Index>(ext.input_dim);
  Matrix e = Matrix::Zero(static_cast<Eigen::Index>(ext.pattern.rows()),
                          static_cast<Eigen::Index>(ext.pattern.cols()));
  for (std::size_t i = 0; i < ext.block_rows; ++i) {
    const auto row0 = static_cast<Eigen::Index>(i * ext.state_dim);
    e.block(row0, static_cast<Eigen::Index>(ext.block_col_offset(2 * i)), m,
            n_in) = k;
    if (i + 1 < ext.block_rows)
      e.block(row0, static_cast<Eigen::Index>(ext.block_col_offset(2 * i + 1)),
              m, m) = Matrix::Identity(m, m);
    if (i >= 1)
      e.block(row0, static_cast<Eigen::Index>(ext.block_col_offset(2 * i - 1)),
              m, m) = -a;
  }
  return e;
}

/// Structural controllability of the pattern pair (A, K): the extended
/// matrix must reach full generic row rank. Cross-validated by sampling
/// parameter values and testing the numeric Krylov rank.
inline StructuralVerdict structural_controllability(
    const StructuredMatrix& a_pattern, const StructuredMatrix& k_pattern,
    int oracle_trials = 200, std::uint64_t seed = 20240601) {
  const ExtendedControllabilityMatrix ext =
      build_extended_matrix(a_pattern, k_pattern);
  const auto m = static_cast<int>(ext.state_dim);

  StructuralVerdict v;
  v.target_rank = static_cast<int>(ext.pattern.rows());
  v.oracle_trials = oracle_trials;

  if (ext.input_dim == 0) {
    // no inputs at all: the extended pattern is not even wide enough for
    // the certificate, and nothing is reachable
    v.controllable = false;
    v.generic_rank = generic_rank(ext.pattern);
    v.form.has_form = true;
    v.form.generic_rank = v.generic_rank;
    for (std::size_t r = 0; r < ext.state_dim; ++r)
      v.form.zero_rows.push_back(r);
    return v;
  }

  v.form = has_form_t(ext.pattern, v.target_rank);
  v.generic_rank = v.form.generic_rank;
  v.controllable = !v.form.has_form;

  std::mt19937_64 rng(seed);
  for (int trial = 0; trial < oracle_trials; ++trial) {
    const Matrix a = a_pattern.sample(rng);
    const Matrix k = k_pattern.sample(rng);
    ComplexMatrix kal(m, m * static_cast<int>(ext.input_dim));
    Matrix block = k;
    for (int p = 0; p < m; ++p) {
      kal.middleCols(static_cast<Eigen::Index>(p) *
                         static_cast<Eigen::Index>(ext.input_dim),
                     static_cast<Eigen::Index>(ext.input_dim)) =
          block.cast<Complex>();
      if (p + 1 < m) block = a * block;
    }
    v.oracle_max_kalman_rank =
        std::max(v.oracle_max_kalman_rank, rank_with_tolerance(kal).rank);
  }
  const bool oracle_controllable = v.oracle_max_kalman_rank == m;
  v.oracle_agrees = (oracle_controllable == v.controllable);
  return v;
}

} // namespace flownet
