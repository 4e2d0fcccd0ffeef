#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include "flownet/delay.hpp"
#include "flownet/graph.hpp"

namespace testutil {

using flownet::Complex;

// Adaptive Simpson quadrature; oracle for every closed-form integral in the
// library. Deliberately independent of the piecewise machinery: it only
// evaluates the integrand pointwise.
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, double tol = 1e-12, int depth = 24) {
  const double c = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fc = f(c);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
  std::function<double(double, double, double, double, double, double, int)>
      rec = [&](double x0, double x2, double f0, double f2, double f1,
                double acc, int d) -> double {
    const double x1l = 0.5 * (x0 + 0.5 * (x0 + x2));
    const double x1r = 0.5 * (0.5 * (x0 + x2) + x2);
    const double xm = 0.5 * (x0 + x2);
    const double fl = f(x1l), fr = f(x1r);
    const double left = (xm - x0) / 6.0 * (f0 + 4.0 * fl + f1);
    const double right = (x2 - xm) / 6.0 * (f1 + 4.0 * fr + f2);
    if (d <= 0 || std::abs(left + right - acc) < 15.0 * tol)
      return left + right + (left + right - acc) / 15.0;
    return rec(x0, xm, f0, f1, fl, left, d - 1) +
           rec(xm, x2, f1, f2, fr, right, d - 1);
  };
  return rec(a, b, fa, fb, fc, whole, depth);
}

inline Complex simpson_c(const std::function<Complex(double)>& f, double a,
                         double b, double tol = 1e-12) {
  const double re = simpson([&](double x) { return f(x).real(); }, a, b, tol);
  const double im = simpson([&](double x) { return f(x).imag(); }, a, b, tol);
  return {re, im};
}

inline flownet::PiecewiseConstant random_pieces(std::mt19937_64& rng,
                                                double lo, double hi,
                                                int max_pieces = 3) {
  std::uniform_int_distribution<int> np(1, max_pieces);
  std::uniform_real_distribution<double> val(lo, hi);
  std::uniform_real_distribution<double> pos(0.1, 0.9);
  const int n = np(rng);
  std::vector<double> breaks{0.0};
  std::vector<double> cuts;
  for (int i = 1; i < n; ++i) cuts.push_back(pos(rng));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (double c : cuts) breaks.push_back(c);
  breaks.push_back(1.0);
  std::vector<double> values;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) values.push_back(val(rng));
  return flownet::PiecewiseConstant(breaks, values);
}

// Random strongly-coupled small graph with Kirchhoff weights. Every vertex
// gets at least one outgoing edge so the adjacency stays column stochastic.
inline flownet::GraphDescription random_graph(std::mt19937_64& rng,
                                              bool zero_absorption = false,
                                              int max_vertices = 4,
                                              int extra_edges = 3) {
  std::uniform_int_distribution<int> nv(2, max_vertices);
  const int n = nv(rng);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::uniform_int_distribution<int> ne(0, extra_edges);

  flownet::GraphDescription d;
  for (int v = 0; v < n; ++v) d.vertices.push_back("v" + std::to_string(v));

  struct Draft {
    int tail, head;
  };
  std::vector<Draft> drafts;
  for (int v = 0; v < n; ++v) drafts.push_back({v, pick(rng)});
  const int extra = ne(rng);
  for (int k = 0; k < extra; ++k) drafts.push_back({pick(rng), pick(rng)});

  std::vector<int> out_count(static_cast<std::size_t>(n), 0);
  for (const auto& dr : drafts) ++out_count[static_cast<std::size_t>(dr.tail)];

  std::uniform_real_distribution<double> wraw(0.2, 1.0);
  std::vector<double> wsum(static_cast<std::size_t>(n), 0.0);
  std::vector<double> weights;
  for (const auto& dr : drafts) {
    const double w = wraw(rng);
    weights.push_back(w);
    wsum[static_cast<std::size_t>(dr.tail)] += w;
  }

  for (std::size_t j = 0; j < drafts.size(); ++j) {
    flownet::EdgeSpec e;
    e.id = "e" + std::to_string(j);
    e.tail = "v" + std::to_string(drafts[j].tail);
    e.head = "v" + std::to_string(drafts[j].head);
    e.velocity = random_pieces(rng, 0.5, 3.0);
    e.absorption = zero_absorption
                       ? flownet::PiecewiseConstant::constant(0.0)
                       : random_pieces(rng, -1.0, 0.5);
    e.weight = weights[j] / wsum[static_cast<std::size_t>(drafts[j].tail)];
    d.edges.push_back(std::move(e));
  }

  std::uniform_real_distribution<double> kval(-1.0, 1.0);
  d.control = flownet::Matrix::Zero(static_cast<Eigen::Index>(d.edges.size()), 2);
  for (Eigen::Index r = 0; r < d.control.rows(); ++r)
    for (Eigen::Index c = 0; c < 2; ++c) d.control(r, c) = kval(rng);
  return d;
}

inline flownet::DelayBank random_delays(std::mt19937_64& rng,
                                        std::size_t edges, double r) {
  std::uniform_real_distribution<double> w(-1.0, 1.0);
  std::uniform_real_distribution<double> th(0.05, 0.95);
  std::uniform_int_distribution<int> kind(0, 2);
  std::vector<flownet::DelayMeasure> ms;
  for (std::size_t j = 0; j < edges; ++j) {
    switch (kind(rng)) {
      case 0:
        ms.emplace_back(r, std::vector<flownet::DelayMeasure::Atom>{
                               {-r * th(rng), w(rng)}});
        break;
      case 1:
        ms.push_back(flownet::DelayMeasure(
            r, {}, {-r, -0.5 * r, 0.0}, {w(rng), w(rng)}));
        break;
      default:
        ms.push_back(flownet::DelayMeasure(
            r, {{-r, w(rng)}}, {-r, -0.3 * r, 0.0}, {w(rng), w(rng)}));
    }
  }
  return flownet::DelayBank(std::move(ms));
}

inline flownet::EdgeProfiles random_profiles(std::mt19937_64& rng,
                                             std::size_t edges, std::size_t n,
                                             int pieces = 4) {
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  flownet::EdgeProfiles out;
  for (std::size_t j = 0; j < edges; ++j) {
    auto pc = random_pieces(rng, -1.0, 1.0, pieces);
    flownet::EdgeProfile p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = pc(p.node(i));
    out.push_back(std::move(p));
  }
  return out;
}

} // namespace testutil
