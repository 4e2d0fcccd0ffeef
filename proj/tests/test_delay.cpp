#include <catch2/catch_amalgamated.hpp>

#include "flownet/delay.hpp"
#include "flownet/fixtures.hpp"
#include "flownet/transport.hpp"
#include "test_util.hpp"

using namespace flownet;
using Catch::Approx;

TEST_CASE("kernel validation enforces the no-instant-mass rule") {
  CHECK_THROWS_AS(DelayMeasure(1.0, {{0.0, 1.0}}), ValidationError);
  CHECK_THROWS_AS(DelayMeasure(1.0, {{-1.5, 1.0}}), ValidationError);
  CHECK_THROWS_AS(DelayMeasure(1.0, {}, {-0.5, 0.0}, {1.0}), ValidationError);
  CHECK_NOTHROW(DelayMeasure(1.0, {{-1.0, 1.0}}, {-1.0, 0.0}, {0.3}));

  try {
    DelayMeasure(1.0, {{0.0, 1.0}});
  } catch (const ValidationError& e) {
    CHECK(e.rule() == "(A4)");
  }
}

TEST_CASE("theta transform closed forms") {
  auto atom = DelayMeasure::single_atom(1.0, 1.0);
  CHECK(atom.theta_transform(Complex(0.0, 0.0)).real() == Approx(1.0));
  CHECK(atom.theta_transform(Complex(2.0, 0.0)).real() ==
        Approx(std::exp(-2.0)));

  CHECK(DelayMeasure::zero().theta_transform(Complex(1.0, 0.0)) ==
        Complex(0.0, 0.0));

  // density pieces against quadrature
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> w(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double r = 0.7;
    const double v1 = w(rng), v2 = w(rng);
    DelayMeasure m(r, {}, {-r, -0.3, 0.0}, {v1, v2});
    const Complex lambda(0.4 * trial - 1.0, trial % 2 ? 0.8 : -0.3);
    auto density = [&](double th) { return th < -0.3 ? v1 : v2; };
    const Complex ref = testutil::simpson_c(
        [&](double th) { return density(th) * std::exp(lambda * th); }, -r,
        0.0);
    const Complex got = m.theta_transform(lambda);
    CHECK(got.real() == Approx(ref.real()).margin(1e-10));
    CHECK(got.imag() == Approx(ref.imag()).margin(1e-10));
  }
}

namespace {
HistoryBuffer constant_buffer(const MetricGraph& g, double dt, double span,
                              double value, std::size_t n) {
  HistoryBuffer buf(dt, span, g.edge_count());
  const auto steps = static_cast<int>(std::ceil(span / dt)) + 1;
  for (int k = -steps; k <= 0; ++k) {
    EdgeProfiles state = zero_profiles(g.edge_count(), n);
    for (auto& e : state)
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = value;
    buf.push(k * dt, state, weighted_moments(g, state));
  }
  return buf;
}
} // namespace

TEST_CASE("delay functional on constant history") {
  MetricGraph g = fixtures::loop();
  const double r = 1.0;
  HistoryBuffer buf = constant_buffer(g, 0.05, r + 0.2, 1.0, 65);

  SECTION("zero measure gives zero") {
    DelayBank zero{std::vector<DelayMeasure>{DelayMeasure::zero()}};
    Vector v = apply_delay(zero, buf, 0.0);
    CHECK(v[0] == 0.0);
  }
  SECTION("unit atom at -r reads the full mass") {
    DelayBank bank{std::vector<DelayMeasure>{DelayMeasure::single_atom(r, 1.0)}};
    Vector v = apply_delay(bank, buf, 0.0);
    CHECK(v[0] == Approx(1.0).margin(1e-12));
  }
  SECTION("uniform density averages to the same value") {
    DelayBank bank{
        std::vector<DelayMeasure>{DelayMeasure::uniform_density(r, 1.0)}};
    Vector v = apply_delay(bank, buf, 0.0);
    CHECK(v[0] == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("history gap is reported") {
  MetricGraph g = fixtures::loop();
  HistoryBuffer buf = constant_buffer(g, 0.05, 0.3, 1.0, 33);
  DelayBank bank{std::vector<DelayMeasure>{DelayMeasure::single_atom(2.0, 1.0)}};
  CHECK_THROWS_AS(apply_delay(bank, buf, 0.0), HistoryGap);
}

TEST_CASE("frequency response of the kernel matches the worked value") {
  // unit-speed edge, no absorption, single atom at -1: the response to the
  // lambda mode is exp(-lambda) (1 - exp(-lambda)) / lambda at lambda = 1
  MetricGraph g = fixtures::loop();
  DelayBank bank{std::vector<DelayMeasure>{DelayMeasure::single_atom(1.0, 1.0)}};
  const Complex lambda(1.0, 0.0);
  DirichletProfile mode(g, lambda);
  ComplexVector resp = delay_mode_response(bank, lambda, mode.weighted_integrals());
  CHECK(resp[0].real() == Approx(0.23254415793482963).margin(1e-12));
  CHECK(resp[0].imag() == Approx(0.0).margin(1e-15));

  SECTION("lambda = 0 with unit atom and unit profile gives one") {
    ComplexVector flat(1);
    flat[0] = 1.0;
    ComplexVector at0 = delay_mode_response(bank, Complex(0.0, 0.0), flat);
    CHECK(at0[0].real() == Approx(1.0));
  }
  SECTION("zero measure gives zero") {
    DelayBank zero{std::vector<DelayMeasure>{DelayMeasure::zero()}};
    ComplexVector v = delay_mode_response(zero, lambda, mode.weighted_integrals());
    CHECK(std::abs(v[0]) == 0.0);
  }
}

TEST_CASE("buffered functional converges to the frequency response") {
  // feed the buffer with the sampled history extension of a real mode and
  // compare against the closed form; the gap is interpolation error
  MetricGraph g = fixtures::two_cycle_speeds();
  const double r = 0.8;
  const double lambda = 0.9;
  std::vector<DelayMeasure> ms{
      DelayMeasure(r, {{-0.5 * r, 0.7}}, {-r, 0.0}, {0.4}),
      DelayMeasure::uniform_density(r, 1.3)};
  DelayBank bank(std::move(ms));

  const std::size_t n = 257;
  DirichletProfile mode(g, Complex(lambda, 0.0));
  EdgeProfiles base = mode.sample(n);

  const double dt = r / 256.0;
  HistoryBuffer buf(dt, r, g.edge_count());
  const auto steps = static_cast<int>(std::ceil(r / dt)) + 1;
  for (int k = -steps; k <= 0; ++k) {
    const double th = k * dt;
    EdgeProfiles state = base;
    for (auto& e : state)
      for (std::size_t i = 0; i < e.size(); ++i)
        e[i] *= std::exp(lambda * th);
    buf.push(th, state, weighted_moments(g, state));
  }

  // the second edge has a speed jump at x = 0.5, so the trapezoid moment
  // carries a first-order error there; everything else is second order
  Vector got = apply_delay(bank, buf, 0.0);
  ComplexVector expect =
      delay_mode_response(bank, Complex(lambda, 0.0), mode.weighted_integrals());
  for (Eigen::Index j = 0; j < got.size(); ++j)
    CHECK(got[j] == Approx(expect[j].real()).margin(3e-3));
}

TEST_CASE("delay functional is linear in history and kernel") {
  MetricGraph g = fixtures::two_cycle();
  const double r = 0.6;
  const double dt = 0.05;

  auto random_buffer = [&](std::uint64_t seed) {
    std::mt19937_64 r2(seed);
    HistoryBuffer buf(dt, r, 2);
    const auto steps = static_cast<int>(std::ceil(r / dt)) + 1;
    for (int k = -steps; k <= 0; ++k) {
      EdgeProfiles state = testutil::random_profiles(r2, 2, 33);
      buf.push(k * dt, state, weighted_moments(g, state));
    }
    return buf;
  };

  HistoryBuffer ba = random_buffer(1);
  HistoryBuffer bb = random_buffer(2);

  // additive in the kernel: merge atoms, add densities
  DelayMeasure m1(r, {{-0.3, 0.8}}, {-r, 0.0}, {0.5});
  DelayMeasure m2(r, {{-0.45, -1.2}}, {-r, 0.0}, {-0.2});
  DelayMeasure msum(r, {{-0.3, 0.8}, {-0.45, -1.2}}, {-r, 0.0}, {0.3});
  DelayBank b1{std::vector<DelayMeasure>{m1, m1}};
  DelayBank b2{std::vector<DelayMeasure>{m2, m2}};
  DelayBank bsum{std::vector<DelayMeasure>{msum, msum}};
  Vector s1 = apply_delay(b1, ba, 0.0);
  Vector s2 = apply_delay(b2, ba, 0.0);
  Vector ssum = apply_delay(bsum, ba, 0.0);
  for (Eigen::Index j = 0; j < 2; ++j)
    CHECK(ssum[j] == Approx(s1[j] + s2[j]).margin(1e-12));

  // linear in the history: mix two buffers
  HistoryBuffer mix(dt, r, 2);
  const auto steps = static_cast<int>(std::ceil(r / dt)) + 1;
  for (int k = -steps; k <= 0; ++k) {
    const std::size_t idx = static_cast<std::size_t>(k + steps);
    EdgeProfiles state = ba.state(idx);
    const EdgeProfiles& other = bb.state(idx);
    for (std::size_t e = 0; e < state.size(); ++e)
      for (std::size_t i = 0; i < state[e].size(); ++i)
        state[e][i] = 0.25 * state[e][i] + 2.0 * other[e][i];
    mix.push(k * dt, state, weighted_moments(g, state));
  }
  Vector vmix = apply_delay(b1, mix, 0.0);
  Vector va = apply_delay(b1, ba, 0.0);
  Vector vb = apply_delay(b1, bb, 0.0);
  for (Eigen::Index j = 0; j < 2; ++j)
    CHECK(vmix[j] == Approx(0.25 * va[j] + 2.0 * vb[j]).margin(1e-12));
}

TEST_CASE("history extension evaluates the closed form") {
  EdgeProfiles g = zero_profiles(1, 17);
  for (std::size_t i = 0; i < 17; ++i) g[0][i] = 1.0;
  HistoryExtension ext(Complex(1.0, 0.0), g);
  CHECK(ext.value(0, 0.0, 0.4).real() == Approx(1.0));
  CHECK(ext.value(0, -0.7, 0.4).real() == Approx(std::exp(-0.7)));

  HistoryExtension flat(Complex(0.0, 0.0), g);
  CHECK(flat.value(0, -0.33, 0.9).real() == Approx(1.0));
}

TEST_CASE("left shift of a history segment") {
  const double r = 1.0;
  auto phi = HistoryFunction::sample(r, 64, [&](double theta) {
    EdgeProfiles p = zero_profiles(1, 9);
    for (std::size_t i = 0; i < 9; ++i) p[0][i] = std::sin(3.0 * theta) + 2.0;
    return p;
  });

  SECTION("shift by zero is the identity") {
    HistoryFunction s = shift_history(phi, 0.0);
    for (std::size_t k = 0; k <= 64; ++k)
      CHECK(s.snapshot(k)[0][0] == Approx(phi.snapshot(k)[0][0]));
  }
  SECTION("shift beyond the horizon clears everything") {
    HistoryFunction s = shift_history(phi, r + 0.1);
    for (std::size_t k = 0; k <= 64; ++k) CHECK(s.snapshot(k)[0][0] == 0.0);
  }
  SECTION("interior point moves by t") {
    HistoryFunction s = shift_history(phi, 0.5 * r);
    CHECK(s.value(0, -0.75 * r, 0.0) ==
          Approx(phi.value(0, -0.25 * r, 0.0)).margin(1e-12));
  }
  SECTION("shift law is exact on the grid") {
    const double a = 16.0 / 64.0, b = 8.0 / 64.0;
    HistoryFunction two = shift_history(shift_history(phi, a), b);
    HistoryFunction one = shift_history(phi, a + b);
    for (std::size_t k = 0; k <= 64; ++k)
      CHECK(two.snapshot(k)[0][3] == Approx(one.snapshot(k)[0][3]).margin(1e-15));
  }
}

TEST_CASE("history control map truncates at the start of time") {
  const double r = 1.0;
  ProfileSeries z(0.0, 0.01);
  for (int k = 0; k <= 100; ++k) {
    EdgeProfiles p = zero_profiles(1, 5);
    for (std::size_t i = 0; i < 5; ++i) p[0][i] = 0.01 * k;  // z(t) = t
    z.push(std::move(p));
  }

  SECTION("at time zero the segment is empty") {
    HistoryFunction h = history_control_map(z, 0.0, r, 32);
    for (std::size_t k = 0; k <= 32; ++k) CHECK(h.snapshot(k)[0][0] == 0.0);
  }
  SECTION("after one horizon it is the exact history") {
    HistoryFunction h = history_control_map(z, 1.0, r, 50);
    CHECK(h.value(0, -0.3, 0.5) == Approx(0.7).margin(1e-12));
    CHECK(h.value(0, 0.0, 0.5) == Approx(1.0).margin(1e-12));
  }
  SECTION("half-filled segment") {
    HistoryFunction h = history_control_map(z, 0.5, r, 100);
    CHECK(h.value(0, -0.25, 0.0) == Approx(0.25).margin(1e-12));
    CHECK(h.value(0, -0.75, 0.0) == 0.0);
  }
  SECTION("missing coverage is an error") {
    ProfileSeries late(0.5, 0.01);
    for (int k = 0; k <= 10; ++k) late.push(zero_profiles(1, 5));
    CHECK_THROWS_AS(history_control_map(late, 0.55, r, 8), SignalTooShort);
  }
}
