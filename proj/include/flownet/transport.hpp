#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "flownet/graph.hpp"
#include "flownet/grid.hpp"

namespace flownet {

/// Free transport of the edge profiles by time t. Each grid value is pulled
/// back along its characteristic: points whose source has already left
/// through the inflow end become zero, so on a finite graph the result is
/// identically zero once t exceeds the longest edge transit time.
inline EdgeProfiles apply_semigroup(const MetricGraph& g,
                                    const EdgeProfiles& profiles, double t) {
  if (profiles.size() != g.edge_count())
    throw DimensionMismatch("one profile per edge expected");
  EdgeProfiles out;
  out.reserve(profiles.size());
  for (std::size_t j = 0; j < profiles.size(); ++j) {
    const EdgeKinematics& kin = g.edge(j).kinematics;
    const EdgeProfile& p = profiles[j];
    EdgeProfile r(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double x = r.node(i);
      if (auto s = kin.advance(x, t)) {
        r[i] = std::exp(kin.log_gain(x, *s)) * p.value_at(*s);
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

/// The lambda-mode edge profiles x -> exp(xi_j(x,1) - lambda tau_j(x,1)):
/// the unique mode shape taking boundary value 1 at the inflow end. Defined
/// for every complex lambda.
class DirichletProfile {
public:
  DirichletProfile(const MetricGraph& g, Complex lambda)
      : graph_(&g), lambda_(lambda) {}

  Complex lambda() const { return lambda_; }

  Complex value(std::size_t edge, double x) const {
    return graph_->edge(edge).kinematics.mode_weight(x, lambda_);
  }

  /// Diagonal of the evaluation at the outflow end x = 0.
  ComplexVector outflow_diagonal() const {
    const auto m = static_cast<Eigen::Index>(graph_->edge_count());
    ComplexVector d(m);
    for (Eigen::Index j = 0; j < m; ++j)
      d[j] = value(static_cast<std::size_t>(j), 0.0);
    return d;
  }

  /// Closed-form int_0^1 c_j(x) * mode(x) dx per edge; used by the
  /// frequency-domain delay term.
  ComplexVector weighted_integrals() const {
    const auto m = static_cast<Eigen::Index>(graph_->edge_count());
    ComplexVector d(m);
    for (Eigen::Index j = 0; j < m; ++j)
      d[j] = graph_->edge(static_cast<std::size_t>(j))
                 .kinematics.weighted_mode_integral(lambda_);
    return d;
  }

  /// Sample (the real part of) the mode onto a grid profile. Only
  /// meaningful for real lambda.
  EdgeProfiles sample(std::size_t n) const {
    EdgeProfiles out;
    out.reserve(graph_->edge_count());
    for (std::size_t j = 0; j < graph_->edge_count(); ++j) {
      EdgeProfile p(n);
      for (std::size_t i = 0; i < n; ++i)
        p[i] = value(j, p.node(i)).real();
      out.push_back(std::move(p));
    }
    return out;
  }

private:
  const MetricGraph* graph_;
  Complex lambda_;
};

/// Boundary-injection control map: the state reached from zero by feeding
/// the per-edge inflow signal v. A grid value at x is the signal value one
/// transit time earlier, amplified by the accumulated gain; points the
/// injected flow has not yet reached stay zero.
inline EdgeProfiles apply_control_map(const MetricGraph& g,
                                      const std::vector<SampledSignal>& v,
                                      double t, std::size_t n) {
  if (v.size() != g.edge_count())
    throw DimensionMismatch("one boundary signal per edge expected");
  EdgeProfiles out;
  out.reserve(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    const EdgeKinematics& kin = g.edge(j).kinematics;
    EdgeProfile r(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = r.node(i);
      const double tau = kin.transit_time(x, 1.0);
      if (t >= tau) {
        r[i] = std::exp(kin.log_gain(x, 1.0)) * v[j].value_at(t - tau);
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

} // namespace flownet
