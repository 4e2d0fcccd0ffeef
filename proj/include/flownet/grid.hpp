#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "flownet/errors.hpp"
#include "flownet/piecewise.hpp"

namespace flownet {

/// Function on [0,1] sampled on a uniform grid (endpoints included),
/// evaluated by linear interpolation.
class EdgeProfile {
public:
  EdgeProfile() : values_(2, 0.0) {}

  explicit EdgeProfile(std::size_t n, double fill = 0.0) : values_(n, fill) {
    if (n < 2) throw ValidationError("Grid", "grid size must be >= 2");
  }

  explicit EdgeProfile(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2)
      throw ValidationError("Grid", "grid size must be >= 2");
  }

  std::size_t size() const { return values_.size(); }
  double dx() const { return 1.0 / static_cast<double>(values_.size() - 1); }
  double node(std::size_t i) const { return static_cast<double>(i) * dx(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

  double value_at(double x) const {
    if (x <= 0.0) return values_.front();
    if (x >= 1.0) return values_.back();
    const double p = x * static_cast<double>(values_.size() - 1);
    const std::size_t i = static_cast<std::size_t>(p);
    const double f = p - static_cast<double>(i);
    return values_[i] * (1.0 - f) + values_[i + 1] * f;
  }

  /// Trapezoid integral over [0,1].
  double integral() const {
    double s = 0.5 * (values_.front() + values_.back());
    for (std::size_t i = 1; i + 1 < values_.size(); ++i) s += values_[i];
    return s * dx();
  }

  /// Trapezoid integral of w(x) * profile(x) for a piecewise-constant w.
  double weighted_integral(const PiecewiseConstant& w) const {
    double s = 0.5 * (w(0.0) * values_.front() + w(1.0) * values_.back());
    for (std::size_t i = 1; i + 1 < values_.size(); ++i)
      s += w(node(i)) * values_[i];
    return s * dx();
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

private:
  std::vector<double> values_;
};

/// Edge-indexed family of profiles: the spatial state z(t,.) of a network.
using EdgeProfiles = std::vector<EdgeProfile>;

inline EdgeProfiles zero_profiles(std::size_t edges, std::size_t n) {
  return EdgeProfiles(edges, EdgeProfile(n));
}

/// Real signal sampled on a uniform time grid starting at t0, linearly
/// interpolated; evaluation outside the covered span throws.
class SampledSignal {
public:
  SampledSignal(double t0, double dt) : t0_(t0), dt_(dt) {
    if (dt <= 0.0) throw ValidationError("Signal", "dt must be positive");
  }

  SampledSignal(double t0, double dt, std::vector<double> values)
      : t0_(t0), dt_(dt), values_(std::move(values)) {
    if (dt <= 0.0) throw ValidationError("Signal", "dt must be positive");
  }

  void push(double v) { values_.push_back(v); }
  std::size_t size() const { return values_.size(); }
  double t0() const { return t0_; }
  double dt() const { return dt_; }
  double t_end() const {
    return values_.empty()
               ? t0_
               : t0_ + dt_ * static_cast<double>(values_.size() - 1);
  }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

  double value_at(double t) const {
    const double eps = 1e-9 * dt_;
    if (values_.empty() || t < t0_ - eps || t > t_end() + eps)
      throw SignalTooShort("signal does not cover t = " + std::to_string(t));
    double p = (t - t0_) / dt_;
    if (p <= 0.0) return values_.front();
    if (p >= static_cast<double>(values_.size() - 1)) return values_.back();
    const std::size_t i = static_cast<std::size_t>(p);
    const double f = p - static_cast<double>(i);
    return values_[i] * (1.0 - f) + values_[i + 1] * f;
  }

  bool covers(double t) const {
    const double eps = 1e-9 * dt_;
    return !values_.empty() && t >= t0_ - eps && t <= t_end() + eps;
  }

private:
  double t0_;
  double dt_;
  std::vector<double> values_;
};

} // namespace flownet
