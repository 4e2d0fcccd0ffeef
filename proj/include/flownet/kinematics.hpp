#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "flownet/errors.hpp"
#include "flownet/piecewise.hpp"

namespace flownet {

using Complex = std::complex<double>;

namespace detail {
/// (1 - exp(-z)) / z with a stable small-|z| expansion.
inline Complex phi1(Complex z) {
  if (std::abs(z) < 1e-6) {
    return 1.0 - z * (0.5 - z * (1.0 / 6.0 - z / 24.0));
  }
  return (1.0 - std::exp(-z)) / z;
}
} // namespace detail

/// Exact travel-time and gain bookkeeping for one edge with piecewise
/// constant velocity c and absorption q.
///
/// Positions are parameterized against the flow: material enters at x = 1
/// and leaves at x = 0. All quantities below are closed forms; there is no
/// quadrature anywhere in this class.
class EdgeKinematics {
public:
  EdgeKinematics() = default;

  EdgeKinematics(const PiecewiseConstant& velocity,
                 const PiecewiseConstant& absorption) {
    if (velocity.min_value() <= 0.0)
      throw NonPositiveVelocity("velocity profile must be strictly positive");
    MergedPieces m = merge_pieces(velocity, absorption);
    breaks_ = m.breakpoints;
    c_ = m.a;
    const std::size_t k = c_.size();
    ratio_.resize(k);
    cum_time_.assign(k + 1, 0.0);
    cum_gain_.assign(k + 1, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      const double h = breaks_[i + 1] - breaks_[i];
      ratio_[i] = m.b[i] / c_[i];
      cum_time_[i + 1] = cum_time_[i] + h / c_[i];
      cum_gain_[i + 1] = cum_gain_[i] + h * ratio_[i];
    }
  }

  /// Time needed to travel from x2 down to x1 (integral of 1/c).
  double transit_time(double x1, double x2) const {
    check_order(x1, x2);
    return cum_time(x2) - cum_time(x1);
  }

  /// Log of the mass gain factor accumulated between x1 and x2
  /// (integral of q/c).
  double log_gain(double x1, double x2) const {
    check_order(x1, x2);
    return cum_gain(x2) - cum_gain(x1);
  }

  double total_transit() const { return cum_time_.back(); }
  double total_log_gain() const { return cum_gain_.back(); }

  /// Position the flow occupied `t` seconds before reaching `x`, i.e. the
  /// unique s in [x,1] with transit_time(x,s) = t. Empty when the flow was
  /// still upstream of the inflow end (t exceeds transit_time(x,1)).
  std::optional<double> advance(double x, double t) const {
    if (t < 0.0) throw OutOfRange("advance requires t >= 0");
    if (t > transit_time(x, 1.0)) return std::nullopt;
    const double target = cum_time(x) + t;
    auto it = std::upper_bound(cum_time_.begin(), cum_time_.end(), target);
    std::size_t i = it == cum_time_.begin()
                        ? 0
                        : static_cast<std::size_t>(it - cum_time_.begin()) - 1;
    i = std::min(i, c_.size() - 1);
    const double s = breaks_[i] + (target - cum_time_[i]) * c_[i];
    return std::min(s, 1.0);
  }

  /// exp(xi(x,1) - lambda * tau(x,1)), the lambda-mode amplitude at x of a
  /// unit boundary value injected at the inflow end.
  Complex mode_weight(double x, Complex lambda) const {
    const Complex expo = (total_log_gain() - cum_gain(x)) -
                         lambda * (total_transit() - cum_time(x));
    return std::exp(expo);
  }

  /// Closed form of  int_0^1 c(x) exp(xi(x,1) - lambda tau(x,1)) dx.
  Complex weighted_mode_integral(Complex lambda) const {
    Complex total = 0.0;
    for (std::size_t i = 0; i < c_.size(); ++i) {
      const double h = breaks_[i + 1] - breaks_[i];
      // exponents at the lower and upper piece end; both stay damped for
      // Re lambda >= 0, which keeps the difference form overflow-safe
      const Complex lo = (total_log_gain() - cum_gain_[i]) -
                         lambda * (total_transit() - cum_time_[i]);
      const Complex hi = (total_log_gain() - cum_gain_[i + 1]) -
                         lambda * (total_transit() - cum_time_[i + 1]);
      const Complex z = lo - hi;  // (q - lambda) h / c
      if (std::abs(z) < 1e-3) {
        // series for (1 - exp(-z))/z, clear of the cancellation in the
        // difference quotient
        const Complex series = 1.0 - z * (0.5 - z * (1.0 / 6.0 - z / 24.0));
        total += c_[i] * h * std::exp(lo) * series;
      } else {
        total += c_[i] * h * (std::exp(lo) - std::exp(hi)) / z;
      }
    }
    return total;
  }

private:
  static void check_order(double x1, double x2) {
    if (!(0.0 <= x1 && x1 <= x2 && x2 <= 1.0))
      throw OutOfRange("need 0 <= x1 <= x2 <= 1");
  }

  double cum_time(double x) const {
    const std::size_t i = piece_index(x);
    return cum_time_[i] + (x - breaks_[i]) / c_[i];
  }

  double cum_gain(double x) const {
    const std::size_t i = piece_index(x);
    return cum_gain_[i] + (x - breaks_[i]) * ratio_[i];
  }

  std::size_t piece_index(double x) const {
    if (x >= breaks_[breaks_.size() - 2]) return c_.size() - 1;
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    return it == breaks_.begin()
               ? 0
               : static_cast<std::size_t>(it - breaks_.begin()) - 1;
  }

  std::vector<double> breaks_;
  std::vector<double> c_;      // velocity per merged piece
  std::vector<double> ratio_;  // q/c per merged piece
  std::vector<double> cum_time_;
  std::vector<double> cum_gain_;
};

} // namespace flownet
