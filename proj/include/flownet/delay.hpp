#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "flownet/graph.hpp"
#include "flownet/grid.hpp"

namespace flownet {

namespace detail {
/// (exp(z) - 1) / z with a stable small-|z| expansion.
inline Complex em1(Complex z) {
  if (std::abs(z) < 1e-6) {
    return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0));
  }
  return (std::exp(z) - 1.0) / z;
}
} // namespace detail

/// Bounded-variation delay kernel on [-r,0]: finitely many atoms plus a
/// piecewise-constant density. No atom may sit at theta = 0, so the kernel
/// carries no mass in the instant limit.
class DelayMeasure {
public:
  struct Atom {
    double theta;
    double weight;
  };

  DelayMeasure() = default;

  DelayMeasure(double r, std::vector<Atom> atoms,
               std::vector<double> density_breaks = {},
               std::vector<double> density_values = {})
      : r_(r), atoms_(std::move(atoms)),
        density_breaks_(std::move(density_breaks)),
        density_values_(std::move(density_values)) {
    validate();
  }

  static DelayMeasure zero() { return DelayMeasure(); }

  static DelayMeasure single_atom(double r, double weight) {
    return DelayMeasure(r, {{-r, weight}});
  }

  static DelayMeasure uniform_density(double r, double total_weight) {
    return DelayMeasure(r, {}, {-r, 0.0}, {total_weight / r});
  }

  double horizon() const { return r_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<double>& density_breaks() const { return density_breaks_; }
  const std::vector<double>& density_values() const { return density_values_; }

  bool is_zero() const {
    if (!atoms_.empty()) return false;
    for (double v : density_values_)
      if (v != 0.0) return false;
    return true;
  }

  double total_variation() const {
    double tv = 0.0;
    for (const auto& a : atoms_) tv += std::abs(a.weight);
    for (std::size_t i = 0; i < density_values_.size(); ++i)
      tv += std::abs(density_values_[i]) *
            (density_breaks_[i + 1] - density_breaks_[i]);
    return tv;
  }

  /// Exact integral of exp(lambda * theta) against the kernel.
  Complex theta_transform(Complex lambda) const {
    Complex f = 0.0;
    for (const auto& a : atoms_) f += a.weight * std::exp(lambda * a.theta);
    for (std::size_t i = 0; i < density_values_.size(); ++i) {
      const double a = density_breaks_[i];
      const double b = density_breaks_[i + 1];
      f += density_values_[i] * (b - a) * std::exp(lambda * a) *
           detail::em1(lambda * (b - a));
    }
    return f;
  }

  /// Kernel with all weights replaced by their absolute values; its real
  /// theta transform dominates |theta_transform| on vertical lines.
  DelayMeasure absolute() const {
    DelayMeasure m = *this;
    for (auto& a : m.atoms_) a.weight = std::abs(a.weight);
    for (auto& v : m.density_values_) v = std::abs(v);
    return m;
  }

private:
  void validate() const {
    if (r_ < 0.0) throw ValidationError("(A4)", "delay horizon must be >= 0");
    for (const auto& a : atoms_) {
      if (!(a.theta >= -r_) || !(a.theta < 0.0))
        throw ValidationError("(A4)", "atoms must lie in [-r, 0); an atom at "
                                      "theta = 0 is not allowed");
      if (!std::isfinite(a.weight))
        throw ValidationError("(A4)", "non-finite atom weight");
    }
    if (density_breaks_.empty() != density_values_.empty() ||
        (!density_breaks_.empty() &&
         density_breaks_.size() != density_values_.size() + 1))
      throw ValidationError("(A4)", "density breakpoint/value mismatch");
    if (!density_breaks_.empty()) {
      if (density_breaks_.front() != -r_ || density_breaks_.back() != 0.0)
        throw ValidationError("(A4)", "density must span [-r, 0]");
      for (std::size_t i = 1; i < density_breaks_.size(); ++i)
        if (!(density_breaks_[i] > density_breaks_[i - 1]))
          throw ValidationError("(A4)", "density breakpoints must increase");
      for (double v : density_values_)
        if (!std::isfinite(v))
          throw ValidationError("(A4)", "non-finite density value");
    }
  }

  double r_ = 0.0;
  std::vector<Atom> atoms_;
  std::vector<double> density_breaks_;  // -r = b0 < ... < bM = 0
  std::vector<double> density_values_;  // one per interval
};

/// One kernel per edge. The common horizon is the largest edge horizon.
class DelayBank {
public:
  DelayBank() = default;
  explicit DelayBank(std::vector<DelayMeasure> measures)
      : measures_(std::move(measures)) {}

  static DelayBank none(std::size_t edges) {
    return DelayBank(std::vector<DelayMeasure>(edges));
  }

  std::size_t size() const { return measures_.size(); }
  const DelayMeasure& operator[](std::size_t j) const { return measures_[j]; }

  double horizon() const {
    double r = 0.0;
    for (const auto& m : measures_) r = std::max(r, m.horizon());
    return r;
  }

  bool is_zero() const {
    for (const auto& m : measures_)
      if (!m.is_zero()) return false;
    return true;
  }

private:
  std::vector<DelayMeasure> measures_;
};

/// History segment: per-edge profiles on a uniform theta grid over [-r,0],
/// linearly interpolated in theta.
class HistoryFunction {
public:
  HistoryFunction() = default;

  HistoryFunction(double r, std::vector<EdgeProfiles> snapshots)
      : r_(r), snapshots_(std::move(snapshots)) {
    if (snapshots_.size() < 2)
      throw ValidationError("History", "need at least two theta samples");
  }

  static HistoryFunction zero(double r, std::size_t steps, std::size_t edges,
                              std::size_t n) {
    return HistoryFunction(
        r, std::vector<EdgeProfiles>(steps + 1, zero_profiles(edges, n)));
  }

  static HistoryFunction sample(double r, std::size_t steps,
                                const std::function<EdgeProfiles(double)>& f) {
    std::vector<EdgeProfiles> snaps;
    snaps.reserve(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
      const double theta =
          -r + static_cast<double>(k) * (r / static_cast<double>(steps));
      snaps.push_back(f(theta));
    }
    return HistoryFunction(r, std::move(snaps));
  }

  double horizon() const { return r_; }
  std::size_t steps() const { return snapshots_.size() - 1; }
  double dtheta() const { return r_ / static_cast<double>(steps()); }
  std::size_t edge_count() const { return snapshots_.front().size(); }

  const EdgeProfiles& snapshot(std::size_t k) const { return snapshots_[k]; }
  const EdgeProfiles& at_zero() const { return snapshots_.back(); }

  /// Linear interpolation in theta; clamped at the ends of [-r,0].
  EdgeProfiles profile_at(double theta) const {
    const double p =
        std::clamp((theta + r_) / dtheta(), 0.0, static_cast<double>(steps()));
    const std::size_t i =
        std::min(static_cast<std::size_t>(p), steps() - 1);
    const double f = p - static_cast<double>(i);
    EdgeProfiles out = snapshots_[i];
    for (std::size_t e = 0; e < out.size(); ++e)
      for (std::size_t k = 0; k < out[e].size(); ++k)
        out[e][k] = snapshots_[i][e][k] * (1.0 - f) + snapshots_[i + 1][e][k] * f;
    return out;
  }

  double value(std::size_t edge, double theta, double x) const {
    const double p =
        std::clamp((theta + r_) / dtheta(), 0.0, static_cast<double>(steps()));
    const std::size_t i =
        std::min(static_cast<std::size_t>(p), steps() - 1);
    const double f = p - static_cast<double>(i);
    return snapshots_[i][edge].value_at(x) * (1.0 - f) +
           snapshots_[i + 1][edge].value_at(x) * f;
  }

private:
  double r_ = 0.0;
  std::vector<EdgeProfiles> snapshots_;
};

/// The history analogue of the Dirichlet mode: (theta, x) -> exp(lambda
/// theta) g(x). Kept in closed form; evaluable anywhere on [-r,0] x [0,1].
class HistoryExtension {
public:
  HistoryExtension(Complex lambda, EdgeProfiles g)
      : lambda_(lambda), g_(std::move(g)) {}

  Complex lambda() const { return lambda_; }
  const EdgeProfiles& boundary() const { return g_; }

  Complex value(std::size_t edge, double theta, double x) const {
    return std::exp(lambda_ * theta) * g_[edge].value_at(x);
  }

  /// Sample the real part onto a HistoryFunction grid (real lambda only).
  HistoryFunction sample(double r, std::size_t steps) const {
    const EdgeProfiles& g = g_;
    const Complex lambda = lambda_;
    return HistoryFunction::sample(r, steps, [&](double theta) {
      EdgeProfiles p = g;
      const double w = std::exp(lambda * theta).real();
      for (auto& e : p)
        for (std::size_t k = 0; k < e.size(); ++k) e[k] *= w;
      return p;
    });
  }

private:
  Complex lambda_;
  EdgeProfiles g_;
};

inline HistoryExtension dirichlet_history(Complex lambda, EdgeProfiles g) {
  return HistoryExtension(lambda, std::move(g));
}

/// Same extension from an edge-indexed vector, taken constant in x.
inline HistoryExtension dirichlet_history(Complex lambda, const Vector& g,
                                          std::size_t n = 2) {
  EdgeProfiles p;
  p.reserve(static_cast<std::size_t>(g.size()));
  for (Eigen::Index j = 0; j < g.size(); ++j)
    p.emplace_back(n, g[j]);
  return HistoryExtension(lambda, std::move(p));
}

/// Left shift by t: values within t of the right end become zero, the rest
/// are shifted from the stored segment. Exact on the stored grid whenever t
/// is a multiple of the grid step.
inline HistoryFunction shift_history(const HistoryFunction& phi, double t) {
  if (t < 0.0) throw OutOfRange("shift requires t >= 0");
  const double r = phi.horizon();
  const std::size_t steps = phi.steps();
  std::vector<EdgeProfiles> snaps;
  snaps.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double theta = -r + static_cast<double>(k) * phi.dtheta();
    if (t > 0.0 && theta >= -t)
      snaps.push_back(zero_profiles(phi.edge_count(),
                                    phi.snapshot(0).front().size()));
    else
      snaps.push_back(phi.profile_at(t + theta));
  }
  return HistoryFunction(r, std::move(snaps));
}

/// Uniformly sampled trajectory of full network states.
class ProfileSeries {
public:
  ProfileSeries(double t0, double dt) : t0_(t0), dt_(dt) {}

  void push(EdgeProfiles p) { states_.push_back(std::move(p)); }
  std::size_t size() const { return states_.size(); }
  double t0() const { return t0_; }
  double dt() const { return dt_; }
  double t_end() const {
    return t0_ + dt_ * static_cast<double>(states_.size() - 1);
  }

  bool covers(double t) const {
    const double eps = 1e-9 * dt_;
    return !states_.empty() && t >= t0_ - eps && t <= t_end() + eps;
  }

  EdgeProfiles value_at(double t) const {
    if (!covers(t))
      throw SignalTooShort("state series does not cover t = " +
                           std::to_string(t));
    const double p = std::clamp((t - t0_) / dt_, 0.0,
                                static_cast<double>(states_.size() - 1));
    const std::size_t i =
        std::min(static_cast<std::size_t>(p), states_.size() - 2);
    const double f = p - static_cast<double>(i);
    EdgeProfiles out = states_[i];
    for (std::size_t e = 0; e < out.size(); ++e)
      for (std::size_t k = 0; k < out[e].size(); ++k)
        out[e][k] = states_[i][e][k] * (1.0 - f) + states_[i + 1][e][k] * f;
    return out;
  }

private:
  double t0_;
  double dt_;
  std::vector<EdgeProfiles> states_;
};

/// History control map: the history segment reached at time t from the zero
/// segment by feeding the trajectory z. For t >= r this is exactly the
/// history of z at time t.
inline HistoryFunction history_control_map(const ProfileSeries& z, double t,
                                           double r, std::size_t steps) {
  if (t < 0.0) throw OutOfRange("history control map requires t >= 0");
  const double lo = std::max(0.0, t - r);
  if (!z.covers(lo) || !z.covers(t))
    throw SignalTooShort("state series must cover [max(0,t-r), t]");
  std::vector<EdgeProfiles> snaps;
  snaps.reserve(steps + 1);
  const double dtheta = r / static_cast<double>(steps);
  const EdgeProfiles zero_state = [&] {
    EdgeProfiles p = z.value_at(t);
    for (auto& e : p) e = EdgeProfile(e.size());
    return p;
  }();
  for (std::size_t k = 0; k <= steps; ++k) {
    const double theta = -r + static_cast<double>(k) * dtheta;
    if (theta < -t)
      snaps.push_back(zero_state);
    else
      snaps.push_back(z.value_at(t + theta));
  }
  return HistoryFunction(r, std::move(snaps));
}

/// Rolling window of network states on the solver's uniform time grid,
/// retaining enough snapshots to cover the delay horizon. Single writer;
/// reads are only valid between pushes.
class HistoryBuffer {
public:
  HistoryBuffer(double dt, double horizon, std::size_t edges)
      : dt_(dt), horizon_(horizon), edges_(edges) {}

  double dt() const { return dt_; }
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  double front_time() const { return times_.front(); }
  double back_time() const { return times_.back(); }

  void push(double t, EdgeProfiles state, std::vector<double> moments) {
    if (!times_.empty() && t <= times_.back() + 0.5 * dt_)
      throw ValidationError("History", "buffer times must increase by dt");
    times_.push_back(t);
    states_.push_back(std::move(state));
    moments_.push_back(std::move(moments));
    // keep a little slack beyond the horizon for interpolation at t-r
    while (times_.size() > 2 &&
           times_.front() < times_.back() - horizon_ - 2.0 * dt_) {
      times_.erase(times_.begin());
      states_.erase(states_.begin());
      moments_.erase(moments_.begin());
    }
  }

  /// Replace the most recent snapshot (used to finalize provisional nodes).
  void amend_back(EdgeProfiles state, std::vector<double> moments) {
    states_.back() = std::move(state);
    moments_.back() = std::move(moments);
  }

  bool covers(double t) const {
    const double eps = 1e-9 * dt_;
    return !times_.empty() && t >= times_.front() - eps &&
           t <= times_.back() + eps;
  }

  /// Linear-in-time interpolation of the weighted spatial moment of edge j.
  double moment_at(std::size_t j, double t) const {
    if (!covers(t))
      throw HistoryGap("history buffer does not cover t = " +
                       std::to_string(t));
    const double p = std::clamp((t - times_.front()) / dt_, 0.0,
                                static_cast<double>(times_.size() - 1));
    std::size_t i = static_cast<std::size_t>(p);
    if (i + 1 >= times_.size()) i = times_.size() - 2;
    const double f = p - static_cast<double>(i);
    return moments_[i][j] * (1.0 - f) + moments_[i + 1][j] * f;
  }

  double node_time(std::size_t i) const { return times_[i]; }
  const EdgeProfiles& state(std::size_t i) const { return states_[i]; }

private:
  double dt_;
  double horizon_;
  std::size_t edges_;
  std::vector<double> times_;
  std::vector<EdgeProfiles> states_;
  std::vector<std::vector<double>> moments_;
};

/// Weighted spatial moments int_0^1 c_j(x) z_j(x) dx of a network state,
/// by the trapezoid rule on the storage grid.
inline std::vector<double> weighted_moments(const MetricGraph& g,
                                            const EdgeProfiles& state) {
  std::vector<double> m(state.size());
  for (std::size_t j = 0; j < state.size(); ++j)
    m[j] = state[j].weighted_integral(g.edge(j).velocity);
  return m;
}

/// The vertex delay functional applied to the buffered history at time t:
/// component k integrates the weighted moment of edge k against the kernel,
/// atoms by interpolation and density pieces by exact integration of the
/// piecewise-linear moment.
inline Vector apply_delay(const DelayBank& delays, const HistoryBuffer& buf,
                          double t) {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(delays.size()));
  for (std::size_t k = 0; k < delays.size(); ++k) {
    const DelayMeasure& mu = delays[k];
    if (mu.is_zero()) continue;
    double acc = 0.0;
    for (const auto& a : mu.atoms())
      acc += a.weight * buf.moment_at(k, t + a.theta);
    const auto& db = mu.density_breaks();
    const auto& dv = mu.density_values();
    for (std::size_t p = 0; p < dv.size(); ++p) {
      if (dv[p] == 0.0) continue;
      const double s_lo = t + db[p];
      const double s_hi = t + db[p + 1];
      // split [s_lo, s_hi] at buffer nodes: the moment is linear between them
      double s = s_lo;
      double m_left = buf.moment_at(k, s);
      while (s < s_hi) {
        const double idx =
            std::floor((s - buf.front_time()) / buf.dt() + 1e-12) + 1.0;
        double s_next = std::min(s_hi, buf.front_time() + idx * buf.dt());
        if (s_next <= s) s_next = s_hi;
        const double m_right = buf.moment_at(k, s_next);
        acc += dv[p] * (s_next - s) * 0.5 * (m_left + m_right);
        s = s_next;
        m_left = m_right;
      }
    }
    out[static_cast<Eigen::Index>(k)] = acc;
  }
  return out;
}

/// Frequency-domain delay response: component k of the delay functional
/// applied to the history extension of a lambda mode, i.e. the exact theta
/// transform of the kernel times the weighted mode integral of edge k.
inline ComplexVector delay_mode_response(const DelayBank& delays,
                                         Complex lambda,
                                         const ComplexVector& mode_integrals) {
  if (static_cast<std::size_t>(mode_integrals.size()) != delays.size())
    throw DimensionMismatch("one mode integral per edge expected");
  ComplexVector out(mode_integrals.size());
  for (Eigen::Index k = 0; k < mode_integrals.size(); ++k)
    out[k] = delays[static_cast<std::size_t>(k)].theta_transform(lambda) *
             mode_integrals[k];
  return out;
}

/// Same composition evaluated from sampled profiles by the trapezoid rule;
/// used to cross-check the closed form.
inline ComplexVector delay_mode_response(const MetricGraph& g,
                                         const DelayBank& delays,
                                         Complex lambda,
                                         const EdgeProfiles& profiles) {
  ComplexVector out(static_cast<Eigen::Index>(profiles.size()));
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    const double integral =
        profiles[k].weighted_integral(g.edge(k).velocity);
    out[static_cast<Eigen::Index>(k)] =
        delays[k].theta_transform(lambda) * integral;
  }
  return out;
}

} // namespace flownet
