#include <catch2/catch_amalgamated.hpp>

#include "flownet/fixtures.hpp"
#include "flownet/transport.hpp"
#include "test_util.hpp"

using namespace flownet;
using Catch::Approx;

namespace {
MetricGraph unit_loop() { return fixtures::loop(); }

EdgeProfiles constant_profiles(const MetricGraph& g, std::size_t n, double v) {
  EdgeProfiles p = zero_profiles(g.edge_count(), n);
  for (auto& e : p)
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = v;
  return p;
}
} // namespace

TEST_CASE("semigroup at t=0 is the identity") {
  MetricGraph g = unit_loop();
  std::mt19937_64 rng(3);
  EdgeProfiles p = testutil::random_profiles(rng, 1, 33);
  EdgeProfiles q = apply_semigroup(g, p, 0.0);
  for (std::size_t i = 0; i < p[0].size(); ++i)
    CHECK(q[0][i] == Approx(p[0][i]).margin(1e-15));
}

TEST_CASE("semigroup is nilpotent past the longest transit") {
  MetricGraph g = fixtures::branching();
  std::mt19937_64 rng(4);
  EdgeProfiles p = testutil::random_profiles(rng, g.edge_count(), 64);
  EdgeProfiles q = apply_semigroup(g, p, g.max_transit() + 1e-9);
  for (const auto& e : q)
    for (std::size_t i = 0; i < e.size(); ++i) CHECK(e[i] == 0.0);
}

TEST_CASE("unit speed transport is a plain shift") {
  MetricGraph g = unit_loop();
  EdgeProfiles p = constant_profiles(g, 5, 1.0);  // nodes at 0, .25, .5, .75, 1
  EdgeProfiles q = apply_semigroup(g, p, 0.25);
  CHECK(q[0][0] == Approx(1.0));
  CHECK(q[0][1] == Approx(1.0));
  CHECK(q[0][2] == Approx(1.0));
  CHECK(q[0][3] == Approx(1.0));  // x = 0.75 still fed from g(1)
  CHECK(q[0][4] == 0.0);          // x = 1 has no source after t > 0
}

TEST_CASE("semigroup composition within interpolation error") {
  std::mt19937_64 rng(17);
  MetricGraph g = fixtures::two_cycle_speeds();
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 129;
    // piecewise-constant data with known exact evaluations
    std::vector<PiecewiseConstant> exact;
    EdgeProfiles p;
    for (std::size_t j = 0; j < g.edge_count(); ++j) {
      exact.push_back(testutil::random_pieces(rng, -1.0, 1.0, 4));
      EdgeProfile e(n);
      for (std::size_t i = 0; i < n; ++i) e[i] = exact[j](e.node(i));
      p.push_back(std::move(e));
    }
    std::uniform_real_distribution<double> dt(0.0, g.tau0());
    const double s = dt(rng), t = dt(rng);

    EdgeProfiles stage = apply_semigroup(g, p, s);
    EdgeProfiles two_step = apply_semigroup(g, stage, t);
    EdgeProfiles one_step = apply_semigroup(g, p, s + t);

    // both routes differ from the exact composition only through one
    // interpolated read each (the gains are exactly 1 on this fixture), so
    // the gap is bounded by twice the worst interpolation error
    double err = 0.0, delta = 0.0;
    for (std::size_t j = 0; j < g.edge_count(); ++j) {
      const EdgeKinematics& kin = g.edge(j).kinematics;
      for (std::size_t i = 0; i < n; ++i) {
        const double x = p[j].node(i);
        err = std::max(err, std::abs(two_step[j][i] - one_step[j][i]));
        if (auto mid = kin.advance(x, t)) {
          double stage_exact = 0.0;
          if (auto far = kin.advance(*mid, s)) stage_exact = exact[j](*far);
          delta = std::max(delta,
                           std::abs(stage[j].value_at(*mid) - stage_exact));
          if (auto far2 = kin.advance(x, s + t))
            delta = std::max(
                delta, std::abs(p[j].value_at(*far2) - exact[j](*far2)));
        }
      }
    }
    CHECK(err <= 2.0 * delta + 1e-12);
  }
}

TEST_CASE("dirichlet mode with zero data is identically one at lambda 0") {
  MetricGraph g = fixtures::two_cycle();
  DirichletProfile d(g, Complex(0.0, 0.0));
  for (double x : {0.0, 0.3, 0.77, 1.0}) {
    CHECK(d.value(0, x).real() == Approx(1.0));
    CHECK(d.value(0, x).imag() == 0.0);
  }
}

TEST_CASE("dirichlet mode of the unit-speed edge decays like exp(-(1-x))") {
  MetricGraph g = unit_loop();
  DirichletProfile d(g, Complex(1.0, 0.0));
  for (double x : {0.0, 0.25, 0.9}) {
    CHECK(d.value(0, x).real() == Approx(std::exp(-(1.0 - x))).margin(1e-14));
  }
}

TEST_CASE("dirichlet outflow diagonal vanishes at large real frequency") {
  MetricGraph g = fixtures::branching();
  double prev = DirichletProfile(g, Complex(1.0, 0.0))
                    .outflow_diagonal()
                    .cwiseAbs()
                    .maxCoeff();
  for (double re : {4.0, 16.0, 64.0}) {
    const double cur = DirichletProfile(g, Complex(re, 0.0))
                           .outflow_diagonal()
                           .cwiseAbs()
                           .maxCoeff();
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(prev < 1e-10);
}

TEST_CASE("control map stays zero before the first arrival") {
  MetricGraph g = fixtures::two_cycle();
  std::vector<SampledSignal> v;
  for (std::size_t j = 0; j < g.edge_count(); ++j) {
    SampledSignal s(0.0, 0.01);
    for (int i = 0; i <= 200; ++i) s.push(1.0);
    v.push_back(std::move(s));
  }
  EdgeProfiles p = apply_control_map(g, v, 0.5 * g.tau0(), 65);
  double mass = 0.0;
  for (const auto& e : p) mass += e.integral();
  // only the slice with tau(x,1) <= t is filled
  CHECK(p[0][64] == Approx(1.0));  // x = 1 reads v(t) directly
  CHECK(p[0][0] == 0.0);
  CHECK(mass > 0.0);

  EdgeProfiles q = apply_control_map(g, v, 0.0, 65);
  for (std::size_t i = 0; i + 1 < q[0].size(); ++i) CHECK(q[0][i] == 0.0);
}

TEST_CASE("constant input fills the unit edge after one transit") {
  MetricGraph g = unit_loop();
  SampledSignal s(0.0, 0.05);
  for (int i = 0; i <= 40; ++i) s.push(1.0);
  EdgeProfiles p = apply_control_map(g, {s}, 1.0, 33);
  for (std::size_t i = 0; i < p[0].size(); ++i)
    CHECK(p[0][i] == Approx(1.0).margin(1e-14));

  SECTION("a balanced gain stamps exp(1 - x) onto the filled edge") {
    MetricGraph gq = fixtures::loop_absorbing();
    EdgeProfiles pq = apply_control_map(gq, {s}, 1.5, 33);
    for (std::size_t i = 0; i < pq[0].size(); ++i)
      CHECK(pq[0][i] ==
            Approx(std::exp(1.0 - pq[0].node(i))).margin(1e-12));
  }
  SECTION("nonnegative inputs reach nonnegative states") {
    EdgeProfiles pp = apply_control_map(g, {s}, 0.4, 33);
    for (std::size_t i = 0; i < pp[0].size(); ++i) CHECK(pp[0][i] >= 0.0);
  }
}

TEST_CASE("exponential input reproduces the dirichlet mode") {
  // with v(t) = exp(lambda t) the filled part of the state is exactly
  // exp(lambda t) times the lambda mode
  MetricGraph g = fixtures::two_cycle_speeds();
  const double lambda = 0.8;
  const double t_end = g.max_transit() + 0.5;
  const double dt = 1e-4;
  std::vector<SampledSignal> v;
  for (std::size_t j = 0; j < g.edge_count(); ++j) {
    SampledSignal s(0.0, dt);
    for (double t = 0.0; t <= t_end + dt; t += dt) s.push(std::exp(lambda * t));
    v.push_back(std::move(s));
  }
  EdgeProfiles p = apply_control_map(g, v, t_end, 41);
  DirichletProfile mode(g, Complex(lambda, 0.0));
  for (std::size_t j = 0; j < g.edge_count(); ++j)
    for (std::size_t i = 0; i < p[j].size(); ++i) {
      const double expect =
          std::exp(lambda * t_end) * mode.value(j, p[j].node(i)).real();
      CHECK(p[j][i] == Approx(expect).margin(1e-8 * std::exp(lambda * t_end)));
    }
}

TEST_CASE("positivity is preserved") {
  MetricGraph g = fixtures::branching();
  std::mt19937_64 rng(23);
  EdgeProfiles p = testutil::random_profiles(rng, g.edge_count(), 65);
  for (auto& e : p)
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = std::abs(e[i]);
  EdgeProfiles q = apply_semigroup(g, p, 0.3);
  for (const auto& e : q)
    for (std::size_t i = 0; i < e.size(); ++i) CHECK(e[i] >= 0.0);
}
