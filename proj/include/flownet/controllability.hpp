#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "flownet/freq.hpp"
#include "flownet/linalg.hpp"

namespace flownet {

/// Horizontal Krylov block [K, A K, ..., A^(depth-1) K].
inline ComplexMatrix kalman_matrix(const ComplexMatrix& A,
                                   const ComplexMatrix& K,
                                   std::size_t depth) {
  if (A.rows() != A.cols() || A.rows() != K.rows())
    throw DimensionMismatch("square A with matching K expected");
  const auto m = A.rows();
  const auto n = K.cols();
  ComplexMatrix out(m, n * static_cast<Eigen::Index>(depth));
  ComplexMatrix block = K;
  for (std::size_t k = 0; k < depth; ++k) {
    out.middleCols(static_cast<Eigen::Index>(k) * n, n) = block;
    if (k + 1 < depth) block = A * block;
  }
  return out;
}

enum class Verdict { Controllable, NotControllable, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Controllable: return "controllable";
    case Verdict::NotControllable: return "not-controllable";
    default: return "inconclusive";
  }
}

struct LambdaAnalysis {
  Complex lambda;
  double operator_norm1 = 0.0;
  int rank = 0;
  Vector singular_values;
  bool skipped_singular = false;  // 1 was (numerically) in the spectrum
  std::optional<ComplexVector> witness;  // left null vector when deficient
};

struct ControllabilityReport {
  Verdict verdict = Verdict::Inconclusive;
  std::size_t state_dim = 0;
  std::size_t kalman_depth = 0;
  double rank_threshold = 1e-8;
  double mu0 = 0.0;
  bool mu0_unbounded_below = false;
  std::vector<LambdaAnalysis> samples;
  std::optional<ComplexVector> witness;       // annihilating functional g*
  std::optional<Complex> witness_lambda;
  // history-space annotations (filled by annotate_history_controllability)
  std::string state_space_note;
  std::string history_space_note;
  std::string product_space_note;
  bool history_witness_recorded = false;
  std::vector<std::string> notes;
};

struct ControllabilityOptions {
  std::vector<Complex> lambda_samples;  // empty = defaults above mu0
  double rank_threshold = 1e-8;
  std::size_t kalman_depth = 0;         // 0 = state dimension
  bool allow_low_frequency = false;     // permit samples at Re lambda <= mu0
};

inline std::vector<Complex> default_lambda_samples(double mu0) {
  return {Complex(mu0 + 0.5, 0.0), Complex(mu0 + 1.0, 0.0),
          Complex(mu0 + 2.0, 0.0), Complex(mu0 + 4.0, 0.0),
          Complex(mu0 + 8.0, 0.0), Complex(mu0 + 1.0, 1.0),
          Complex(mu0 + 1.0, -1.0)};
}

/// Kalman-type test of approximate controllability on a finite section.
/// The verdict holds for the state space of edge profiles; rank deficiency
/// at some sample produces an explicit annihilating functional.
inline ControllabilityReport approx_controllability(
    const MetricGraph& g, const DelayBank& delays,
    const ControllabilityOptions& opt = {}) {
  const std::size_t m = g.edge_count();
  ControllabilityReport rep;
  rep.state_dim = m;
  rep.rank_threshold = opt.rank_threshold;
  rep.kalman_depth = opt.kalman_depth == 0 ? m : opt.kalman_depth;

  const Mu0Estimate mu0 = estimate_mu0(g, delays);
  rep.mu0 = mu0.mu0;
  rep.mu0_unbounded_below = mu0.unbounded_below;

  std::vector<Complex> samples = opt.lambda_samples.empty()
                                     ? default_lambda_samples(mu0.mu0)
                                     : opt.lambda_samples;
  const ComplexMatrix K = effective_input(g);

  bool any_full = false, any_deficient = false, all_skipped = true;
  for (const Complex& lambda : samples) {
    if (lambda.real() <= mu0.mu0 && !opt.allow_low_frequency)
      throw ValidationError(
          "Frequency", "sample Re lambda = " + std::to_string(lambda.real()) +
                           " is not above mu0 = " + std::to_string(mu0.mu0) +
                           " (pass the low-frequency override to force it)");
    LambdaAnalysis a;
    a.lambda = lambda;
    const FreqOperator op = assemble_frequency_operator(g, delays, lambda);
    a.operator_norm1 = op.norm1();
    if (lambda.real() <= mu0.mu0) {
      // outside the contraction region the resolvent must be checked
      const ComplexMatrix IA =
          ComplexMatrix::Identity(op.matrix.rows(), op.matrix.cols()) -
          op.matrix;
      const RankResult rr = rank_with_tolerance(IA, 1e-12);
      if (rr.rank < IA.rows()) {
        a.skipped_singular = true;
        rep.notes.push_back("sample skipped: 1 is in the spectrum of the "
                            "coupling operator at Re lambda = " +
                            std::to_string(lambda.real()));
        rep.samples.push_back(std::move(a));
        continue;
      }
    }
    const ComplexMatrix km = kalman_matrix(op.matrix, K, rep.kalman_depth);
    const RankResult rr = rank_with_tolerance(km, opt.rank_threshold);
    a.rank = rr.rank;
    a.singular_values = rr.singular_values;
    all_skipped = false;
    if (rr.rank == static_cast<int>(m)) {
      any_full = true;
    } else {
      any_deficient = true;
      a.witness = left_null_vector(km);
      if (!rep.witness) {
        rep.witness = a.witness;
        rep.witness_lambda = lambda;
      }
    }
    rep.samples.push_back(std::move(a));
  }

  if (all_skipped) {
    rep.verdict = Verdict::Inconclusive;
    rep.notes.push_back("every sample was singular; no rank evidence");
  } else if (any_full && any_deficient) {
    rep.verdict = Verdict::Inconclusive;
    rep.notes.push_back("rank disagrees across frequency samples");
  } else if (any_deficient) {
    rep.verdict = Verdict::NotControllable;
  } else {
    rep.verdict = Verdict::Controllable;
  }
  return rep;
}

/// Record how the state-space verdict transfers to the history space and
/// the product space on a finite section. The history transfer multiplies
/// the reachable columns by an injective mode extension, so the finite-
/// section verdicts coincide; a state-space witness g* lifts to the history
/// witness theta -> exp(-lambda theta) g*.
inline ControllabilityReport annotate_history_controllability(
    ControllabilityReport rep, const DelayBank& delays) {
  const char* v = to_string(rep.verdict);
  rep.state_space_note = std::string("state space: ") + v;
  const double r = delays.horizon();
  if (rep.verdict == Verdict::NotControllable && rep.witness) {
    rep.history_space_note =
        "history space (r = " + std::to_string(r) +
        "): not-controllable; witness phi*(theta) = exp(-lambda theta) g* "
        "with lambda = " +
        std::to_string(rep.witness_lambda->real()) + "+" +
        std::to_string(rep.witness_lambda->imag()) + "i";
    rep.history_witness_recorded = true;
    rep.product_space_note = "product space: not-controllable (either factor "
                             "failing rules it out)";
  } else if (rep.verdict == Verdict::Controllable) {
    rep.history_space_note = std::string("history space (r = ") +
                             std::to_string(r) +
                             "): coincides on the finite section (the mode "
                             "extension is injective per frequency)";
    rep.product_space_note =
        "product space: history-space controllability implies state-space "
        "controllability; on the finite section both hold";
  } else {
    rep.history_space_note = "history space: inconclusive";
    rep.product_space_note = "product space: inconclusive";
  }
  return rep;
}

/// Residual of the annihilating functional against the Kalman block,
/// relative to the product of norms; small values certify the witness.
inline double witness_residual(const ComplexVector& witness,
                               const ComplexMatrix& kalman) {
  const double wn = witness.norm();
  const double kn = kalman.norm();
  if (wn == 0.0 || kn == 0.0) return 0.0;
  return (witness.adjoint() * kalman).norm() / (wn * kn);
}

} // namespace flownet
