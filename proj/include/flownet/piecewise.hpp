#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "flownet/errors.hpp"

namespace flownet {

/// Piecewise-constant function on [0,1]. `breakpoints` has K+1 strictly
/// increasing entries with first 0 and last 1; `values[i]` is the value on
/// [breakpoints[i], breakpoints[i+1]). Evaluation is right-continuous,
/// except at x = 1 which belongs to the last piece.
class PiecewiseConstant {
public:
  PiecewiseConstant() : breakpoints_{0.0, 1.0}, values_{0.0} {}

  PiecewiseConstant(std::vector<double> breakpoints, std::vector<double> values)
      : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
    validate();
  }

  static PiecewiseConstant constant(double v) {
    return PiecewiseConstant({0.0, 1.0}, {v});
  }

  std::size_t piece_count() const { return values_.size(); }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }

  std::size_t piece_index(double x) const {
    if (x < 0.0 || x > 1.0)
      throw OutOfRange("position " + std::to_string(x) + " outside [0,1]");
    if (x >= breakpoints_[breakpoints_.size() - 2]) return values_.size() - 1;
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    return static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  }

  double operator()(double x) const { return values_[piece_index(x)]; }

  double min_value() const {
    return *std::min_element(values_.begin(), values_.end());
  }
  double max_value() const {
    return *std::max_element(values_.begin(), values_.end());
  }

  bool operator==(const PiecewiseConstant& o) const {
    return breakpoints_ == o.breakpoints_ && values_ == o.values_;
  }

private:
  void validate() const {
    if (breakpoints_.size() < 2 || values_.size() + 1 != breakpoints_.size())
      throw ValidationError("Profile", "breakpoint/value arrays inconsistent");
    if (breakpoints_.front() != 0.0 || breakpoints_.back() != 1.0)
      throw ValidationError("Profile", "breakpoints must start at 0 and end at 1");
    for (std::size_t i = 1; i < breakpoints_.size(); ++i)
      if (!(breakpoints_[i] > breakpoints_[i - 1]))
        throw ValidationError("Profile", "breakpoints must be strictly increasing");
    for (double v : values_)
      if (!std::isfinite(v))
        throw ValidationError("Profile", "non-finite piece value");
  }

  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

/// Merge the breakpoint sets of two piecewise-constant functions and return
/// the common refinement as (breakpoints, values of a, values of b).
struct MergedPieces {
  std::vector<double> breakpoints;
  std::vector<double> a;
  std::vector<double> b;
};

inline MergedPieces merge_pieces(const PiecewiseConstant& a,
                                 const PiecewiseConstant& b) {
  MergedPieces m;
  const auto& ba = a.breakpoints();
  const auto& bb = b.breakpoints();
  m.breakpoints.reserve(ba.size() + bb.size());
  std::merge(ba.begin(), ba.end(), bb.begin(), bb.end(),
             std::back_inserter(m.breakpoints));
  m.breakpoints.erase(std::unique(m.breakpoints.begin(), m.breakpoints.end()),
                      m.breakpoints.end());
  for (std::size_t i = 0; i + 1 < m.breakpoints.size(); ++i) {
    double mid = 0.5 * (m.breakpoints[i] + m.breakpoints[i + 1]);
    m.a.push_back(a(mid));
    m.b.push_back(b(mid));
  }
  return m;
}

} // namespace flownet
