#include <catch2/catch_amalgamated.hpp>

#include "flownet/kinematics.hpp"
#include "test_util.hpp"

using namespace flownet;
using Catch::Approx;

namespace {
EdgeKinematics make(const PiecewiseConstant& c, const PiecewiseConstant& q) {
  return EdgeKinematics(c, q);
}
} // namespace

TEST_CASE("transit time closed forms") {
  auto k = make(PiecewiseConstant::constant(2.0),
                PiecewiseConstant::constant(0.0));
  CHECK(k.transit_time(0.0, 1.0) == Approx(0.5));
  CHECK(k.transit_time(0.3, 0.3) == 0.0);

  auto k2 = make(PiecewiseConstant({0.0, 0.5, 1.0}, {1.0, 2.0}),
                 PiecewiseConstant::constant(0.0));
  CHECK(k2.transit_time(0.0, 1.0) == Approx(0.75));

  CHECK_THROWS_AS(k.transit_time(0.6, 0.3), OutOfRange);
}

TEST_CASE("log gain closed forms") {
  auto zero = make(PiecewiseConstant::constant(1.5),
                   PiecewiseConstant::constant(0.0));
  CHECK(zero.log_gain(0.0, 1.0) == 0.0);

  auto balanced = make(PiecewiseConstant::constant(3.0),
                       PiecewiseConstant::constant(3.0));
  CHECK(balanced.log_gain(0.0, 1.0) == Approx(1.0));

  auto damped = make(PiecewiseConstant::constant(2.0),
                     PiecewiseConstant::constant(-1.0));
  CHECK(damped.log_gain(0.0, 1.0) == Approx(-0.5));
}

TEST_CASE("transit and gain match quadrature on random profiles") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 25; ++trial) {
    auto c = testutil::random_pieces(rng, 0.4, 3.0);
    auto q = testutil::random_pieces(rng, -1.5, 1.5);
    auto kin = make(c, q);
    std::uniform_real_distribution<double> pos(0.0, 1.0);
    double x1 = pos(rng), x2 = pos(rng);
    if (x1 > x2) std::swap(x1, x2);

    const double tau_ref =
        testutil::simpson([&](double x) { return 1.0 / c(x); }, x1, x2);
    const double xi_ref =
        testutil::simpson([&](double x) { return q(x) / c(x); }, x1, x2);
    CHECK(kin.transit_time(x1, x2) == Approx(tau_ref).margin(1e-10));
    CHECK(kin.log_gain(x1, x2) == Approx(xi_ref).margin(1e-10));
  }
}

TEST_CASE("transit time is additive") {
  std::mt19937_64 rng(7);
  auto c = testutil::random_pieces(rng, 0.4, 3.0);
  auto kin = make(c, PiecewiseConstant::constant(0.0));
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    double a = pos(rng), b = pos(rng), d = pos(rng);
    std::vector<double> v{a, b, d};
    std::sort(v.begin(), v.end());
    CHECK(kin.transit_time(v[0], v[1]) + kin.transit_time(v[1], v[2]) ==
          Approx(kin.transit_time(v[0], v[2])).margin(1e-13));
  }
}

TEST_CASE("flow position inverts the transit map") {
  auto unit = make(PiecewiseConstant::constant(1.0),
                   PiecewiseConstant::constant(0.0));
  CHECK(unit.advance(0.2, 0.3).value() == Approx(0.5));
  CHECK(unit.advance(0.7, 0.0).value() == Approx(0.7));

  auto fast = make(PiecewiseConstant::constant(2.0),
                   PiecewiseConstant::constant(0.0));
  CHECK_FALSE(fast.advance(0.0, 0.6).has_value());  // total transit is 0.5

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    auto c = testutil::random_pieces(rng, 0.4, 3.0);
    auto kin = make(c, PiecewiseConstant::constant(0.0));
    std::uniform_real_distribution<double> pos(0.0, 1.0);
    const double x = pos(rng);
    std::uniform_real_distribution<double> time(0.0, kin.transit_time(x, 1.0));
    const double t = time(rng);
    auto s = kin.advance(x, t);
    REQUIRE(s.has_value());
    CHECK(kin.transit_time(x, *s) == Approx(t).margin(1e-12));
  }
}

TEST_CASE("mode weight and weighted mode integral match quadrature") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 15; ++trial) {
    auto c = testutil::random_pieces(rng, 0.4, 3.0);
    auto q = testutil::random_pieces(rng, -1.0, 1.0);
    auto kin = make(c, q);
    const Complex lambda(0.7 + 0.2 * trial, trial % 3 == 0 ? 0.9 : -0.4);

    auto mode = [&](double x) {
      return std::exp(kin.log_gain(x, 1.0) -
                      lambda * kin.transit_time(x, 1.0));
    };
    const Complex probe = kin.mode_weight(0.33, lambda);
    CHECK(probe.real() == Approx(mode(0.33).real()).margin(1e-12));
    CHECK(probe.imag() == Approx(mode(0.33).imag()).margin(1e-12));

    const Complex ref = testutil::simpson_c(
        [&](double x) { return c(x) * mode(x); }, 0.0, 1.0);
    const Complex got = kin.weighted_mode_integral(lambda);
    CHECK(got.real() == Approx(ref.real()).margin(1e-9));
    CHECK(got.imag() == Approx(ref.imag()).margin(1e-9));
  }
}

TEST_CASE("velocity must stay positive") {
  CHECK_THROWS_AS(make(PiecewiseConstant::constant(0.0),
                       PiecewiseConstant::constant(0.0)),
                  NonPositiveVelocity);
  CHECK_THROWS_AS(make(PiecewiseConstant({0.0, 0.5, 1.0}, {1.0, -2.0}),
                       PiecewiseConstant::constant(0.0)),
                  NonPositiveVelocity);
}
