#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "flownet/delay.hpp"
#include "flownet/graph.hpp"
#include "flownet/grid.hpp"
#include "flownet/linalg.hpp"
#include "flownet/transport.hpp"

namespace flownet {

/// Control signal u(t) in R^N: either per-channel samples or the closed
/// form amplitude * exp(rate * t).
class Control {
public:
  Control() = default;

  static Control none() { return Control(); }

  static Control sampled(std::vector<SampledSignal> channels) {
    Control c;
    c.sampled_ = std::move(channels);
    return c;
  }

  static Control exponential(double rate, Vector amplitude) {
    Control c;
    c.rate_ = rate;
    c.amplitude_ = std::move(amplitude);
    c.exponential_ = true;
    return c;
  }

  std::size_t channels() const {
    if (exponential_) return static_cast<std::size_t>(amplitude_.size());
    return sampled_.size();
  }

  bool empty() const { return !exponential_ && sampled_.empty(); }

  Vector value(double t) const {
    if (exponential_) return std::exp(rate_ * t) * amplitude_;
    Vector u = Vector::Zero(static_cast<Eigen::Index>(sampled_.size()));
    for (std::size_t l = 0; l < sampled_.size(); ++l)
      u[static_cast<Eigen::Index>(l)] = sampled_[l].value_at(t);
    return u;
  }

  bool is_exponential() const { return exponential_; }
  double rate() const { return rate_; }
  const Vector& amplitude() const { return amplitude_; }

private:
  std::vector<SampledSignal> sampled_;
  Vector amplitude_;
  double rate_ = 0.0;
  bool exponential_ = false;
};

struct Scenario {
  MetricGraph graph;
  DelayBank delays;
  EdgeProfiles initial;                          // empty = zero state
  std::optional<HistoryFunction> initial_history; // default: frozen initial
  Control control;
  double horizon = 1.0;
  double dt = 0.0;                               // 0 = min(tau0, r)/32
  std::size_t nx = 256;
  std::vector<double> snapshot_times;
  double blowup_guard = 1e12;

  double resolved_dt() const {
    if (dt > 0.0) return dt;
    double step = graph.tau0() / 32.0;
    const double r = delays.horizon();
    if (r > 0.0) step = std::min(step, r / 32.0);
    return step;
  }
};

enum class TraceKind { Outflow, Inflow };

struct SolutionRecord {
  std::vector<double> times;
  Matrix inflow;   // time x edge, z_j(t, 1)
  Matrix outflow;  // time x edge, z_j(t, 0)
  std::vector<std::pair<double, EdgeProfiles>> snapshots;
  std::vector<double> trace_sup;  // per-step diagnostic
  EdgeProfiles final_state;
  double dt = 0.0;
  std::size_t nx = 0;
  double boundary_residual_t0 = 0.0;
  int truncation_depth = 0;

  const Matrix& trace(TraceKind k) const {
    return k == TraceKind::Inflow ? inflow : outflow;
  }
};

namespace detail {

/// Pointwise state reconstruction along characteristics: a grid value at
/// (t, x) is either the transported initial value (when the foot of the
/// characteristic is still inside the edge) or the inflow trace one transit
/// time earlier, scaled by the accumulated gain.
class Reconstructor {
public:
  Reconstructor(const MetricGraph& g, const EdgeProfiles& initial,
                const std::vector<std::vector<double>>& traces, double dt,
                std::size_t nx)
      : graph_(&g), initial_(&initial), traces_(&traces), dt_(dt), nx_(nx) {
    tau_.resize(g.edge_count());
    gain_.resize(g.edge_count());
    for (std::size_t j = 0; j < g.edge_count(); ++j) {
      const EdgeKinematics& kin = g.edge(j).kinematics;
      tau_[j].resize(nx);
      gain_[j].resize(nx);
      EdgeProfile probe(nx);
      for (std::size_t i = 0; i < nx; ++i) {
        const double x = probe.node(i);
        tau_[j][i] = kin.transit_time(x, 1.0);
        gain_[j][i] = std::exp(kin.log_gain(x, 1.0));
      }
    }
  }

  /// Linear interpolation of the stored inflow trace; reads beyond the
  /// last recorded step clamp to it (only provisional snapshots do that).
  double trace_at(std::size_t j, double t) const {
    const auto& b = (*traces_)[j];
    if (b.empty()) return 0.0;
    const double p = t / dt_;
    if (p <= 0.0) return b.front();
    const double last = static_cast<double>(b.size() - 1);
    if (p >= last) return b.back();
    const std::size_t i = static_cast<std::size_t>(p);
    const double f = p - static_cast<double>(i);
    return b[i] * (1.0 - f) + b[i + 1] * f;
  }

  double value(std::size_t j, std::size_t i, double t) const {
    const double tau = tau_[j][i];
    if (t < tau) {
      const EdgeKinematics& kin = graph_->edge(j).kinematics;
      const double x = static_cast<double>(i) / static_cast<double>(nx_ - 1);
      if (auto s = kin.advance(x, t))
        return std::exp(kin.log_gain(x, *s)) * (*initial_)[j].value_at(*s);
      return 0.0;
    }
    return gain_[j][i] * trace_at(j, t - tau);
  }

  EdgeProfiles state_at(double t) const {
    EdgeProfiles out;
    out.reserve(graph_->edge_count());
    for (std::size_t j = 0; j < graph_->edge_count(); ++j) {
      EdgeProfile p(nx_);
      for (std::size_t i = 0; i < nx_; ++i) p[i] = value(j, i, t);
      out.push_back(std::move(p));
    }
    return out;
  }

  double outflow_transit(std::size_t j) const { return tau_[j][0]; }
  double outflow_gain(std::size_t j) const { return gain_[j][0]; }

private:
  const MetricGraph* graph_;
  const EdgeProfiles* initial_;
  const std::vector<std::vector<double>>* traces_;
  double dt_;
  std::size_t nx_;
  std::vector<std::vector<double>> tau_;   // tau_j(x_i, 1)
  std::vector<std::vector<double>> gain_;  // exp(xi_j(x_i, 1))
};

inline EdgeProfile resample(const EdgeProfile& p, std::size_t n) {
  if (p.size() == n) return p;
  EdgeProfile out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = p.value_at(out.node(i));
  return out;
}

inline EdgeProfiles resample(const EdgeProfiles& ps, std::size_t n) {
  EdgeProfiles out;
  out.reserve(ps.size());
  for (const auto& p : ps) out.push_back(resample(p, n));
  return out;
}

} // namespace detail

/// Step the controlled delay network forward to the scenario horizon.
///
/// The inflow trace at each step follows from the vertex balance
///   c(1) b(t) = B [c(0) z(t,0) + L z_t] + K u(t),
/// which is explicit: outflow values are reads of strictly earlier inflow
/// traces (or of the transported initial state), and the delay kernel
/// carries no mass at the instant itself.
inline SolutionRecord solve(const Scenario& sc) {
  const MetricGraph& g = sc.graph;
  const std::size_t m = g.edge_count();
  if (sc.delays.size() != 0 && sc.delays.size() != m)
    throw DimensionMismatch("one delay kernel per edge expected");
  const DelayBank delays =
      sc.delays.size() == 0 ? DelayBank::none(m) : sc.delays;

  const std::size_t nx = sc.initial.empty() ? sc.nx : sc.initial[0].size();
  if (nx < 2) throw ValidationError("Grid", "grid size must be >= 2");
  EdgeProfiles initial = sc.initial.empty()
                             ? zero_profiles(m, nx)
                             : detail::resample(sc.initial, nx);
  if (initial.size() != m)
    throw DimensionMismatch("one initial profile per edge expected");

  const double dt = sc.resolved_dt();
  if (!(dt > 0.0) || dt >= g.tau0())
    throw ValidationError("Solver",
                          "time step must satisfy 0 < dt < tau0 = " +
                              std::to_string(g.tau0()));
  const auto steps = static_cast<std::size_t>(std::ceil(sc.horizon / dt - 1e-9));

  if (!sc.control.empty() && sc.control.channels() != g.control_count())
    throw DimensionMismatch("control channels do not match the input pattern");

  const double r = delays.horizon();
  const bool with_delay = r > 0.0 && !delays.is_zero();

  // initial history defaults to the frozen initial state
  HistoryFunction history =
      sc.initial_history.value_or(HistoryFunction::sample(
          std::max(r, dt), 2, [&](double) { return initial; }));
  if (sc.initial_history) {
    const EdgeProfiles at0 = detail::resample(history.at_zero(), nx);
    double scale = 1.0, diff = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      scale = std::max(scale, initial[j].max_abs());
      for (std::size_t i = 0; i < nx; ++i)
        diff = std::max(diff, std::abs(at0[j][i] - initial[j][i]));
    }
    if (diff > 1e-9 * scale)
      throw IncompatibleInitialData(
          "initial history at theta=0 differs from the initial state by " +
          std::to_string(diff));
  }

  const Matrix B = g.adjacency_B();
  const Matrix& K = g.control();
  const Vector& c0 = g.c_out();
  const Vector& c1 = g.c_in();

  std::vector<std::vector<double>> b(m);   // inflow traces z_j(t,1)
  for (auto& row : b) row.reserve(steps + 1);
  detail::Reconstructor recon(g, initial, b, dt, nx);

  HistoryBuffer buffer(dt, r, m);
  if (with_delay) {
    const auto back = static_cast<std::size_t>(std::ceil(r / dt)) + 1;
    for (std::size_t k = back; k >= 1; --k) {
      const double s = -static_cast<double>(k) * dt;
      EdgeProfiles state =
          detail::resample(history.profile_at(std::max(s, -r)), nx);
      auto moments = weighted_moments(g, state);
      buffer.push(s, std::move(state), std::move(moments));
    }
  }

  SolutionRecord rec;
  rec.dt = dt;
  rec.nx = nx;
  rec.truncation_depth = g.truncation_depth();
  rec.times.resize(steps + 1);
  rec.inflow.resize(static_cast<Eigen::Index>(steps + 1),
                    static_cast<Eigen::Index>(m));
  rec.outflow.resize(static_cast<Eigen::Index>(steps + 1),
                     static_cast<Eigen::Index>(m));
  rec.trace_sup.resize(steps + 1);

  std::vector<double> pending_snapshots = sc.snapshot_times;
  std::sort(pending_snapshots.begin(), pending_snapshots.end());
  std::size_t next_snap = 0;

  for (std::size_t n = 0; n <= steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    rec.times[n] = t;

    // outflow traces: a delayed read of the inflow trace once the first
    // injected flow has crossed the edge, the transported initial state
    // before that
    Vector o(static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
      const double tau = recon.outflow_transit(j);
      if (t < tau) {
        const EdgeKinematics& kin = g.edge(j).kinematics;
        const double s = kin.advance(0.0, t).value_or(1.0);
        o[static_cast<Eigen::Index>(j)] =
            std::exp(kin.log_gain(0.0, s)) * initial[j].value_at(s);
      } else {
        o[static_cast<Eigen::Index>(j)] =
            recon.outflow_gain(j) * recon.trace_at(j, t - tau);
      }
    }

    Vector d = Vector::Zero(static_cast<Eigen::Index>(m));
    if (with_delay) {
      // the snapshot at t is provisional near the inflow end (the trace at
      // t is not known yet); it is amended right after the balance below
      EdgeProfiles state = n == 0 ? initial : recon.state_at(t);
      auto moments = weighted_moments(g, state);
      buffer.push(t, std::move(state), std::move(moments));
      d = apply_delay(delays, buffer, t);
    }

    Vector u_term = Vector::Zero(static_cast<Eigen::Index>(m));
    if (!sc.control.empty() && K.cols() > 0)
      u_term = K * sc.control.value(t);

    const Vector rhs = B * (c0.cwiseProduct(o) + d) + u_term;
    Vector bt = rhs.cwiseQuotient(c1);

    double sup = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double v = bt[static_cast<Eigen::Index>(j)];
      if (!std::isfinite(v))
        throw NonFiniteState("non-finite trace at t = " + std::to_string(t), t);
      sup = std::max(sup, std::abs(v));
      sup = std::max(sup, std::abs(o[static_cast<Eigen::Index>(j)]));
      b[j].push_back(v);
    }
    if (sup > sc.blowup_guard)
      throw NonFiniteState("trace magnitude " + std::to_string(sup) +
                               " exceeds the blow-up guard at t = " +
                               std::to_string(t),
                           t);

    rec.trace_sup[n] = sup;
    for (std::size_t j = 0; j < m; ++j) {
      rec.inflow(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)) =
          b[j].back();
      rec.outflow(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)) =
          o[static_cast<Eigen::Index>(j)];
    }

    if (n == 0) {
      // boundary residual of the initial state, logged not rejected
      double res = 0.0;
      for (std::size_t j = 0; j < m; ++j)
        res = std::max(res, std::abs(c1[static_cast<Eigen::Index>(j)] *
                                         initial[j].value_at(1.0) -
                                     rhs[static_cast<Eigen::Index>(j)]));
      rec.boundary_residual_t0 = res;
    }

    if (with_delay && n > 0) {
      EdgeProfiles state = recon.state_at(t);
      auto moments = weighted_moments(g, state);
      buffer.amend_back(std::move(state), std::move(moments));
    }

    while (next_snap < pending_snapshots.size() &&
           pending_snapshots[next_snap] <= t + 0.5 * dt) {
      rec.snapshots.emplace_back(t, n == 0 ? initial : recon.state_at(t));
      ++next_snap;
    }
  }

  rec.final_state = steps == 0 ? initial : recon.state_at(rec.times.back());
  return rec;
}

struct LaplaceResult {
  ComplexVector value;      // per edge
  Vector tail_bound;        // per edge, estimated contribution beyond T
  double growth_estimate = 0.0;
};

/// Finite-horizon Laplace transform of a recorded boundary trace by the
/// composite trapezoid rule, with a tail estimate from the trace envelope.
/// Throws TailNotNegligible when the estimated tail exceeds tail_tol
/// relative to the computed value.
inline LaplaceResult laplace_of_trace(const SolutionRecord& rec,
                                      Complex lambda,
                                      TraceKind kind = TraceKind::Outflow,
                                      double tail_tol = 1e-4) {
  const Matrix& tr = rec.trace(kind);
  const auto n = tr.rows();
  const auto m = tr.cols();
  if (n < 2) throw ValidationError("Laplace", "trace too short");
  const double dt = rec.dt;
  const double T = rec.times.back();

  LaplaceResult res;
  res.value = ComplexVector::Zero(m);
  res.tail_bound = Vector::Zero(m);

  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = rec.times[static_cast<std::size_t>(i)];
    const Complex w = std::exp(-lambda * t) *
                      ((i == 0 || i + 1 == n) ? 0.5 * dt : dt);
    for (Eigen::Index j = 0; j < m; ++j) res.value[j] += w * tr(i, j);
  }

  // growth rate of the envelope over the last quarter of the horizon
  const auto win = std::max<Eigen::Index>(2, n / 4);
  double head = 0.0, tail = 0.0;
  for (Eigen::Index i = n - win; i < n - win / 2; ++i)
    head = std::max(head, tr.row(i).cwiseAbs().maxCoeff());
  for (Eigen::Index i = n - win / 2; i < n; ++i)
    tail = std::max(tail, tr.row(i).cwiseAbs().maxCoeff());
  const double span = dt * static_cast<double>(win) * 0.5;
  double growth = 0.0;
  if (head > 0.0 && tail > 0.0) growth = std::log(tail / head) / span;
  growth = std::max(growth, 0.0) + 1e-12;
  res.growth_estimate = growth;

  if (lambda.real() <= growth)
    throw TailNotNegligible(
        "Re lambda = " + std::to_string(lambda.real()) +
        " does not dominate the trace growth estimate " +
        std::to_string(growth));

  for (Eigen::Index j = 0; j < m; ++j) {
    const double fT = std::abs(tr(n - 1, j));
    res.tail_bound[j] =
        fT * std::exp(-lambda.real() * T) / (lambda.real() - growth);
    const double scale = std::abs(res.value[j]);
    if (scale > 0.0 && res.tail_bound[j] > tail_tol * scale)
      throw TailNotNegligible("estimated tail " +
                              std::to_string(res.tail_bound[j]) +
                              " exceeds tolerance for edge " +
                              std::to_string(j));
  }
  return res;
}

struct GramianResult {
  Matrix gram;          // probe x probe
  Matrix reached;       // edge x probe: per-edge mass of each final state
};

/// Gram matrix of the states reached from zero by a family of probe
/// controls, in per-edge mass coordinates. Its numerical rank lower-bounds
/// the dimension of the reachable set seen by those coordinates.
inline GramianResult reachability_gramian(const Scenario& base, double t_end,
                                          const std::vector<Control>& probes) {
  Scenario sc = base;
  sc.initial.clear();
  sc.initial_history.reset();
  sc.horizon = t_end;
  const auto m = static_cast<Eigen::Index>(base.graph.edge_count());
  GramianResult out;
  out.reached.resize(m, static_cast<Eigen::Index>(probes.size()));
  for (std::size_t p = 0; p < probes.size(); ++p) {
    sc.control = probes[p];
    SolutionRecord rec = solve(sc);
    for (Eigen::Index j = 0; j < m; ++j)
      out.reached(j, static_cast<Eigen::Index>(p)) =
          rec.final_state[static_cast<std::size_t>(j)].integral();
  }
  out.gram = out.reached.transpose() * out.reached;
  return out;
}

} // namespace flownet
