#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "flownet/graph.hpp"

namespace flownet {

/// Induced 1-norm (maximum column absolute sum), matching the sequence
/// space the network state lives in.
inline double norm1(const ComplexMatrix& m) {
  double best = 0.0;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    best = std::max(best, m.col(c).cwiseAbs().sum());
  return best;
}

inline double norm1(const Matrix& m) {
  double best = 0.0;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    best = std::max(best, m.col(c).cwiseAbs().sum());
  return best;
}

struct RankResult {
  int rank = 0;
  Vector singular_values;
};

/// Numerical rank: number of singular values above threshold * sigma_max.
/// A zero (or empty) matrix has rank 0.
inline RankResult rank_with_tolerance(const ComplexMatrix& m,
                                      double threshold = 1e-8) {
  RankResult r;
  if (m.size() == 0) return r;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  r.singular_values = svd.singularValues();
  const double s1 = r.singular_values.size() ? r.singular_values[0] : 0.0;
  if (s1 <= 0.0) return r;
  for (Eigen::Index i = 0; i < r.singular_values.size(); ++i)
    if (r.singular_values[i] > threshold * s1) ++r.rank;
  return r;
}

inline RankResult rank_with_tolerance(const Matrix& m,
                                      double threshold = 1e-8) {
  return rank_with_tolerance(ComplexMatrix(m.cast<Complex>()), threshold);
}

/// Unit left null vector (annihilating functional) of a rank-deficient
/// matrix: the left singular vector of the smallest singular value.
inline ComplexVector left_null_vector(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullU);
  const Eigen::Index k = std::min(m.rows(), m.cols());
  // rows beyond the rank bound of the factorization are exactly null
  if (m.rows() > k) return svd.matrixU().col(m.rows() - 1);
  return svd.matrixU().col(k - 1);
}

} // namespace flownet
