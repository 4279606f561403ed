#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "hjbd/error.hpp"
#include "hjbd/first_order_hj.hpp"
#include "hjbd/random.hpp"

using namespace hjbd;

namespace {

// Brute-force Lax-Oleinik value in 1D by scanning y.
double brute_envelope_1d(const Prior& p, double x, double t) {
  double best = std::numeric_limits<double>::infinity();
  // nodes k / 1e4 hit the ball boundary exactly
  for (long k = std::lround((x - 20.0) * 1e4); k <= std::lround((x + 20.0) * 1e4); ++k) {
    const double y = static_cast<double>(k) / 1e4;
    const double yv[1] = {y};
    best = std::min(best, (x - y) * (x - y) / (2 * t) + p.eval(yv));
  }
  return best;
}

}  // namespace

TEST_CASE("envelope example for the quadratic prior") {
  const EnvelopeResult e = envelope(Prior::quadratic(1.0, 2), Vec{2.0, -4.0}, 1.0);
  CHECK(e.value == doctest::Approx(5.0));
  CHECK(e.minimizer == Vec{1.0, -2.0});
  CHECK(e.gradient[0] == doctest::Approx(1.0));
  CHECK(e.gradient[1] == doctest::Approx(-2.0));
}

TEST_CASE("envelope matches brute-force minimization") {
  Rng rng(10);
  for (const Prior& p : {Prior::quadratic(0.5, 1), Prior::weighted_l1({2.0}), Prior::ball(1.0, 1), Prior::zero(1)}) {
    for (int k = 0; k < 5; ++k) {
      const double x = rng.uniform(-6, 6), t = rng.uniform(0.2, 3);
      const double xv[1] = {x};
      const EnvelopeResult e = envelope(p, xv, t);
      CHECK(e.value == doctest::Approx(brute_envelope_1d(p, x, t)).epsilon(1e-6));
      CHECK(e.gradient[0] == doctest::Approx((x - e.minimizer[0]) / t));
    }
  }
}

TEST_CASE("l1 envelope is the Huber function") {
  const Prior p = Prior::weighted_l1({2.0});
  const double t = 1.25;
  for (double x : {-5.0, -1.0, 0.0, 2.0, 2.5, 7.0}) {
    const double xv[1] = {x};
    const double huber = std::abs(x) <= 2.5 ? x * x / (2 * t) : 2.0 * std::abs(x) - 0.5 * t * 4.0;
    CHECK(envelope(p, xv, t).value == doctest::Approx(huber).epsilon(1e-14));
  }
}

TEST_CASE("grid construction") {
  const Grid1D g = Grid1D::uniform(-1.0, 1.0, 5);
  CHECK(g.values == Vec{-1.0, -0.5, 0.0, 0.5, 1.0});
  CHECK(g.spacing() == 0.5);
  CHECK_THROWS_AS(Grid1D::uniform(0.0, 1.0, 2), InvalidArgument);
  CHECK_THROWS_AS(Grid1D::uniform(1.0, 0.0, 5), InvalidArgument);
}

TEST_CASE("discrete legendre of a parabola and endpoint detection") {
  const Grid1D g = Grid1D::uniform(-10.0, 10.0, 2001);
  Vec f(g.count);
  for (std::size_t i = 0; i < g.count; ++i) f[i] = 0.5 * g.values[i] * g.values[i];
  const LegendreValue v = discrete_legendre(g, f, 3.0);
  CHECK(v.value == doctest::Approx(4.5).epsilon(1e-12));
  CHECK(g.values[v.index] == doctest::Approx(3.0));
  CHECK_THROWS_AS(discrete_legendre(g, f, 30.0), GridError);
  CHECK(discrete_legendre(g, f, 30.0, false).index == g.count - 1);
}

TEST_CASE("hopf and lax values agree on the grid") {
  const Grid1D g = Grid1D::uniform(-10.0, 10.0, 4001);
  const HopfCheck q = hopf_check_1d(Prior::quadratic(1.0, 1), g, 2.0, 1.0);
  CHECK(q.lax == doctest::Approx(1.0));
  CHECK(std::abs(q.hopf - 1.0) <= 10 * g.spacing() * g.spacing());
  const HopfCheck l = hopf_check_1d(Prior::weighted_l1({2.0}), g, 4.0, 1.25);
  CHECK(std::abs(l.hopf - l.lax) <= 10 * g.spacing() * g.spacing());
}

TEST_CASE("gradient of S_0 tends to the minimal subgradient") {
  const std::vector<Vec> g = grad_s0_limit_check(Prior::quadratic(1.0, 1), Vec{1.0}, Vec{1.0, 0.1, 0.01});
  REQUIRE(g.size() == 3);
  CHECK(g[0][0] == doctest::Approx(0.5));
  CHECK(g[1][0] == doctest::Approx(1.0 / 1.1));
  CHECK(g[2][0] == doctest::Approx(1.0 / 1.01));
  // l1 away from the kink: the gradient reaches lambda once t lambda < |y|
  const std::vector<Vec> l = grad_s0_limit_check(Prior::weighted_l1({2.0}), Vec{0.5}, Vec{1.0, 0.1, 0.01});
  CHECK(l[0][0] == doctest::Approx(0.5));
  CHECK(l[2][0] == doctest::Approx(2.0));
}

TEST_CASE("first-order residual vanishes at second order") {
  const double x[1] = {1.7};
  const double r1 = first_order_residual(Prior::quadratic(1.0, 1), x, 1.0, 1e-2, 1e-2);
  const double r2 = first_order_residual(Prior::quadratic(1.0, 1), x, 1.0, 5e-3, 5e-3);
  CHECK(r1 < 1e-4);
  CHECK(std::log2(r1 / r2) > 1.8);
}
