#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "flownet/delay.hpp"
#include "flownet/graph.hpp"
#include "flownet/linalg.hpp"
#include "flownet/transport.hpp"

namespace flownet {

/// Frequency-domain vertex coupling operator at a fixed complex frequency:
/// the map taking a candidate inflow-trace mode to the mode the boundary
/// balance feeds back. The instantaneous and the delayed contribution are
/// kept separately for diagnostics.
struct FreqOperator {
  Complex lambda;
  ComplexMatrix matrix;          // transport_part + delay_part
  ComplexMatrix transport_part;  // c(1)^-1 B c(0) diag(mode at x=0)
  ComplexMatrix delay_part;      // c(1)^-1 B diag(kernel transform * mode integral)

  double norm1() const { return flownet::norm1(matrix); }
};

/// Assemble the coupling operator from the graph, the delay kernels and an
/// optional routing override (defaults to the graph's weighted adjacency).
/// With zero kernels the delay part vanishes and the matrix reduces to
/// c(1)^-1 B c(0) diag(exp(xi_j(0,1) - lambda tau_j(0,1))).
inline FreqOperator assemble_frequency_operator(
    const MetricGraph& g, const DelayBank& delays, Complex lambda,
    const std::optional<Matrix>& routing = std::nullopt) {
  const auto m = static_cast<Eigen::Index>(g.edge_count());
  const DelayBank bank = delays.size() == 0
                             ? DelayBank::none(static_cast<std::size_t>(m))
                             : delays;
  if (bank.size() != static_cast<std::size_t>(m))
    throw DimensionMismatch("one delay kernel per edge expected");
  const Matrix B = routing.value_or(g.adjacency_B());
  if (B.rows() != m || B.cols() != m)
    throw DimensionMismatch("routing matrix must be m x m");

  DirichletProfile mode(g, lambda);
  const ComplexVector d0 = mode.outflow_diagonal();
  const ComplexVector J = mode.weighted_integrals();
  const ComplexVector delay_diag = delay_mode_response(bank, lambda, J);

  FreqOperator op;
  op.lambda = lambda;
  op.transport_part.resize(m, m);
  op.delay_part.resize(m, m);
  const Vector& c0 = g.c_out();
  const Vector& c1 = g.c_in();
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index k = 0; k < m; ++k) {
      op.transport_part(j, k) = B(j, k) * c0[k] * d0[k] / c1[j];
      op.delay_part(j, k) = B(j, k) * delay_diag[k] / c1[j];
    }
  op.matrix = op.transport_part + op.delay_part;
  return op;
}

struct Mu0Estimate {
  double mu0 = 0.0;
  bool unbounded_below = false;  // the norm stays below 1 for every mu probed
  std::vector<std::pair<double, double>> samples;  // (mu, majorant norm)
};

namespace detail {
inline double majorant_norm(const MetricGraph& g, const DelayBank& abs_bank,
                            double mu, const std::optional<Matrix>& routing) {
  FreqOperator op = assemble_frequency_operator(g, abs_bank, Complex(mu, 0.0),
                                                routing);
  return op.norm1();
}
} // namespace detail

/// Smallest real abscissa beyond which the coupling operator is a strict
/// contraction, found by bisection on the absolute-kernel majorant. The
/// majorant dominates the operator norm on every vertical line, so the
/// returned value is safe for complex frequencies with larger real part.
inline Mu0Estimate estimate_mu0(const MetricGraph& g, const DelayBank& delays,
                                const std::optional<Matrix>& routing =
                                    std::nullopt,
                                double tol = 1e-9) {
  const std::size_t m = g.edge_count();
  DelayBank bank = delays.size() == 0 ? DelayBank::none(m) : delays;
  std::vector<DelayMeasure> abs_measures;
  abs_measures.reserve(m);
  for (std::size_t j = 0; j < m; ++j) abs_measures.push_back(bank[j].absolute());
  DelayBank abs_bank(std::move(abs_measures));

  std::optional<Matrix> abs_routing;
  if (routing) abs_routing = routing->cwiseAbs();

  Mu0Estimate est;
  auto probe = [&](double mu) {
    const double v = detail::majorant_norm(g, abs_bank, mu, abs_routing);
    est.samples.emplace_back(mu, v);
    return v;
  };

  double hi = 1.0;
  while (probe(hi) >= 1.0) {
    hi *= 2.0;
    if (hi > 1e9)
      throw NoConvergence("coupling norm does not drop below 1 up to mu = 1e9");
  }
  double lo = std::min(0.0, hi) - 1.0;
  while (probe(lo) < 1.0) {
    if (lo < -1e9) {
      est.mu0 = lo;
      est.unbounded_below = true;
      return est;
    }
    hi = lo;
    lo = lo * 2.0 - 1.0;
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid) < 1.0)
      hi = mid;
    else
      lo = mid;
  }
  est.mu0 = hi;
  return est;
}

/// Closed-form coupling operator of the junction traffic model: routing by
/// the allocation matrix, no absorption, and one common discrete delay r on
/// every edge. Assembled independently of the general path so the two can
/// be cross-checked; they must agree to machine precision.
inline FreqOperator atfm_operator(const MetricGraph& g, double r, Complex mu) {
  const auto m = static_cast<Eigen::Index>(g.edge_count());
  for (std::size_t j = 0; j < g.edge_count(); ++j) {
    const auto& q = g.edge(j).absorption;
    if (q.min_value() != 0.0 || q.max_value() != 0.0)
      throw ValidationError("ATFM",
                            "the junction model has no absorption; edge '" +
                                g.edge(j).id + "' has q != 0");
  }
  if (r < 0.0) throw ValidationError("ATFM", "delay must be >= 0");

  const Matrix H = g.allocation() ? *g.allocation() : g.adjacency_B();

  // term1_j = exp(-mu tau_j(0,1)),
  // term2_j = int_0^1 exp(-mu (r + tau_j(x,1))) c_j(x) dx, both exact
  ComplexVector term1(m), term2(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& edge = g.edge(static_cast<std::size_t>(j));
    const auto& breaks = edge.velocity.breakpoints();
    const auto& vals = edge.velocity.values();
    Complex acc = 0.0;
    double transit_after = 0.0;  // tau(piece upper end, 1)
    for (std::size_t i = vals.size(); i-- > 0;) {
      const double h = breaks[i + 1] - breaks[i];
      const double c = vals[i];
      acc += c * h * std::exp(-mu * (r + transit_after)) *
             flownet::detail::phi1(mu * h / c);
      transit_after += h / c;
    }
    term1[j] = std::exp(-mu * transit_after);
    term2[j] = acc;
  }

  FreqOperator op;
  op.lambda = mu;
  op.transport_part.resize(m, m);
  op.delay_part.resize(m, m);
  const Vector& c0 = g.c_out();
  const Vector& c1 = g.c_in();
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index k = 0; k < m; ++k) {
      op.transport_part(j, k) = H(j, k) * c0[k] * term1[k] / c1[j];
      op.delay_part(j, k) = H(j, k) * term2[k] / c1[j];
    }
  op.matrix = op.transport_part + op.delay_part;
  return op;
}

/// Effective input matrix seen by the normalized inflow trace: the raw
/// pattern enters the vertex balance through c(1)^-1.
inline ComplexMatrix effective_input(const MetricGraph& g) {
  const auto m = static_cast<Eigen::Index>(g.edge_count());
  ComplexMatrix K = g.control().cast<Complex>();
  for (Eigen::Index j = 0; j < m; ++j)
    K.row(j) /= Complex(g.c_in()[j], 0.0);
  return K;
}

/// Laplace-domain transfer from the control to the outflow trace:
/// diag(mode at x=0) (I - A_lambda)^-1 c(1)^-1 K.
inline ComplexMatrix outflow_transfer(const MetricGraph& g,
                                      const DelayBank& delays,
                                      Complex lambda) {
  const FreqOperator op = assemble_frequency_operator(g, delays, lambda);
  const auto m = static_cast<Eigen::Index>(g.edge_count());
  const ComplexMatrix I = ComplexMatrix::Identity(m, m);
  const ComplexMatrix resolvent =
      (I - op.matrix).partialPivLu().solve(ComplexMatrix(effective_input(g)));
  const ComplexVector d0 = DirichletProfile(g, lambda).outflow_diagonal();
  return d0.asDiagonal() * resolvent;
}

} // namespace flownet
