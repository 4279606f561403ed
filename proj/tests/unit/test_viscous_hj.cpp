#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hjbd/error.hpp"
#include "hjbd/random.hpp"
#include "hjbd/special.hpp"
#include "hjbd/viscous_hj.hpp"

using namespace hjbd;

namespace {

// 1D l1 posterior mean by composite Simpson on each side of the kink at 0; written
// independently of the library's quadrature.
double simpson_l1_mean(double x, double t, double eps, double lambda) {
  const double s = std::sqrt(t * eps), lo = std::min(x, 0.0) - 40 * s - lambda * t,
               hi = std::max(x, 0.0) + 40 * s + lambda * t;
  // shift the exponent by its minimum to avoid underflow
  const double ref = special::soft_threshold(x, lambda * t);
  const double phi0 = (x - ref) * (x - ref) / (2 * t) + lambda * std::abs(ref);
  double z = 0, m = 0;
  for (auto [a, b] : {std::pair{lo, 0.0}, std::pair{0.0, hi}}) {
    const int n = 200000;
    const double h = (b - a) / n;
    for (int i = 0; i <= n; ++i) {
      const double y = a + i * h;
      const double w = h / 3 * ((i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2));
      const double f = std::exp(-((x - y) * (x - y) / (2 * t) + lambda * std::abs(y) - phi0) / eps);
      z += w * f;
      m += w * f * y;
    }
  }
  return m / z;
}

}  // namespace

TEST_CASE("quadrature examples for the zero and quadratic priors") {
  const PosteriorSummary z = posterior_summary_quadrature(Prior::zero(1), Vec{4.2}, {1.0, 1.0});
  CHECK(z.w_eps == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(z.s_eps) < 1e-11);
  CHECK(z.u_pm[0] == doctest::Approx(4.2).epsilon(1e-12));
  CHECK(z.mse == doctest::Approx(1.0).epsilon(1e-10));

  const PosteriorSummary q0 = posterior_summary_quadrature(Prior::quadratic(1.0, 1), Vec{0.0}, {1.0, 2.0});
  CHECK(q0.s_eps == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  const PosteriorSummary q3 = posterior_summary_quadrature(Prior::quadratic(1.0, 1), Vec{3.0}, {1.0, 1.0});
  CHECK(q3.u_pm[0] == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(q3.mse == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("tikhonov closed forms") {
  const PosteriorSummary a = s_eps_closed_quadratic(1.0, Vec{2.0, -4.0}, {1.0, 1.0});
  CHECK(a.u_pm == Vec{1.0, -2.0});
  CHECK(a.mse == doctest::Approx(1.0));
  CHECK(s_eps_closed_quadratic(0.0, Vec{7.0}, {2.0, 3.0}).u_pm[0] == 7.0);
  CHECK(s_eps_closed_quadratic(3.0, Vec{0.0}, {2.0, 0.5}).s_eps == doctest::Approx(0.25 * std::log(7.0)));
  // gradient and laplacian of S from the summary identities
  CHECK(a.grad_s_eps[0] == doctest::Approx(1.0));
  CHECK(a.laplacian_s_eps == doctest::Approx(2.0 * 0.5));
}

TEST_CASE("l1 closed form examples") {
  const double lam[1] = {2.0};
  CHECK(u_pm_closed_l1(lam, Vec{0.0}, {1.25, 0.5}).u_pm[0] == 0.0);
  CHECK(u_pm_closed_l1(lam, Vec{5.0}, {1.25, 1e-6}).u_pm[0] == doctest::Approx(2.5).epsilon(1e-6));
  const double closed = u_pm_closed_l1(lam, Vec{1.0}, {1.25, 0.25}).u_pm[0];
  const double quad = posterior_summary_quadrature(Prior::weighted_l1({2.0}), Vec{1.0}, {1.25, 0.25}).u_pm[0];
  CHECK(std::abs(closed - quad) < 1e-8);
}

TEST_CASE("l1 closed form against an independent Simpson integral") {
  const double lam[1] = {2.0};
  for (double x : {-4.0, -0.3, 0.5, 2.5, 8.0}) {
    for (double eps : {0.025, 0.5, 3.0}) {
      const double closed = u_pm_closed_l1(lam, Vec{x}, {1.25, eps}).u_pm[0];
      CHECK(closed == doctest::Approx(simpson_l1_mean(x, 1.25, eps, 2.0)).epsilon(1e-9));
    }
  }
}

TEST_CASE("l1 closed form stays finite far out") {
  const double lam[2] = {2.0, 0.1};
  for (double x : {-1e6, -1e3, 1e3, 1e6}) {
    const PosteriorSummary s = u_pm_closed_l1(lam, Vec{x, -x}, {0.01, 0.01});
    CHECK(std::isfinite(s.s_eps));
    CHECK(std::isfinite(s.u_pm[0]));
    CHECK(std::isfinite(s.mse));
    CHECK(std::isfinite(s.log_w_eps));
    // far from the kink the posterior is a shifted gaussian
    CHECK(s.u_pm[0] == doctest::Approx(x - 0.01 * 2.0 * (x > 0 ? 1 : -1)).epsilon(1e-12));
  }
}

TEST_CASE("estimate dispatch and the map route") {
  const Prior l1 = Prior::weighted_l1({2.0});
  const PosteriorSummary m = estimate(l1, Vec{5.0}, {1.25, 0.0});
  CHECK(m.u_pm[0] == 2.5);
  CHECK(m.mse == 0.0);
  CHECK(std::isnan(m.w_eps));
  CHECK(std::isnan(m.laplacian_s_eps));
  CHECK(has_closed_form(l1));
  CHECK(!has_closed_form(Prior::ball(1.0, 1)));
  CHECK_THROWS_AS(estimate(Prior::ball(1.0, 1), Vec{0.0}, {1.0, 1.0}, Method::Closed), InvalidArgument);
  const PosteriorSummary a = estimate(l1, Vec{1.0}, {1.25, 0.5}, Method::Closed);
  const PosteriorSummary b = estimate(l1, Vec{1.0}, {1.25, 0.5}, Method::Quadrature);
  CHECK(a.s_eps == doctest::Approx(b.s_eps).epsilon(1e-9));
  CHECK(a.mse == doctest::Approx(b.mse).epsilon(1e-8));
  CHECK_THROWS_AS(posterior_summary_quadrature(l1, Vec{1.0}, {1.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(EstimatorParams({-1.0, 1.0}).validate(), InvalidArgument);
}

TEST_CASE("w_eps underflow keeps log_w_eps") {
  const PosteriorSummary s = s_eps_closed_quadratic(1.0, Vec{1e4}, {1.0, 0.01});
  CHECK(s.w_eps == 0.0);
  CHECK(s.log_w_eps == doctest::Approx(-s.s_eps / 0.01));
  CHECK(std::isfinite(s.log_w_eps));
}

TEST_CASE("k_eps examples") {
  CHECK(k_eps(Prior::zero(1), Vec{2.0}, {1.0, 1.0}) == doctest::Approx(2.0));
  CHECK(k_eps(Prior::quadratic(1.0, 1), Vec{0.0}, {1.0, 2.0}) == doctest::Approx(-std::log(2.0)));
  const double c = k_eps(Prior::weighted_l1({2.0}), Vec{1.0}, {1.25, 0.5}, Method::Closed);
  const double q = k_eps(Prior::weighted_l1({2.0}), Vec{1.0}, {1.25, 0.5}, Method::Quadrature);
  CHECK(c == doctest::Approx(q).epsilon(1e-9));
}

TEST_CASE("discrete conjugate of K_eps") {
  const Grid1D g = Grid1D::uniform(-10.0, 10.0, 4001);
  const double z = k_eps_conjugate_1d(Prior::zero(1), 3.0, {1.0, 1.0}, g);
  CHECK(std::abs(z - 4.5) <= g.spacing() * g.spacing());
  CHECK_THROWS_AS(k_eps_conjugate_1d(Prior::zero(1), 30.0, {1.0, 1.0}, g), GridError);
  // convexity of the conjugate for the l1 prior
  const KEpsTable table = k_eps_table(Prior::weighted_l1({2.0}), {1.25, 0.5}, g);
  Vec ys, ks;
  for (double y = -0.5; y <= 1.5; y += 0.05) ks.push_back(k_eps_conjugate(table, y));
  for (std::size_t i = 1; i + 1 < ks.size(); ++i) CHECK(ks[i - 1] - 2 * ks[i] + ks[i + 1] >= -1e-9);
}

TEST_CASE("posterior means under smoothed priors converge") {
  // 1D ball, truncated-gaussian oracle
  const double x = 3.0, a = -1.0 - x, b = 1.0 - x;
  auto pdf = [](double v) { return std::exp(-0.5 * v * v) / std::sqrt(2 * std::numbers::pi); };
  auto cdf = [](double v) { return 0.5 * std::erfc(-v / std::sqrt(2.0)); };
  const double oracle = x + (pdf(a) - pdf(b)) / (cdf(b) - cdf(a));
  const std::vector<Vec> seq = pm_via_moreau_smoothing(Prior::ball(1.0, 1), Vec{x}, {1.0, 1.0}, Vec{0.5, 0.1, 0.02});
  REQUIRE(seq.size() == 3);
  CHECK(std::abs(seq[2][0] - oracle) < std::abs(seq[1][0] - oracle));
  CHECK(std::abs(seq[1][0] - oracle) < std::abs(seq[0][0] - oracle));

  for (const Vec& v : pm_via_moreau_smoothing(Prior::zero(1), Vec{1.5}, {1.0, 1.0}, Vec{0.5, 0.1}))
    CHECK(v[0] == doctest::Approx(1.5).epsilon(1e-10));

  const double lam[1] = {2.0};
  const double l1 = u_pm_closed_l1(lam, Vec{1.0}, {1.25, 0.5}).u_pm[0];
  const std::vector<Vec> ls =
      pm_via_moreau_smoothing(Prior::weighted_l1({2.0}), Vec{1.0}, {1.25, 0.5}, Vec{0.1, 0.01, 0.001});
  CHECK(std::abs(ls[2][0] - l1) < 2e-3);
}

TEST_CASE("mean minimal subgradient equals the gradient of S") {
  CHECK(mean_min_subgradient(Prior::quadratic(1.0, 1), Vec{2.0}, {1.0, 1.0})[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(mean_min_subgradient(Prior::zero(1), Vec{2.0}, {1.0, 1.0})[0]) < 1e-14);
  const double lam[1] = {2.0};
  const PosteriorSummary s = u_pm_closed_l1(lam, Vec{1.0}, {1.25, 0.5});
  const double g = mean_min_subgradient(Prior::weighted_l1({2.0}), Vec{1.0}, {1.25, 0.5})[0];
  CHECK(std::abs(g - (1.0 - s.u_pm[0]) / 1.25) < 1e-7);
  CHECK_THROWS_AS(mean_min_subgradient(Prior::ball(1.0, 1), Vec{0.0}, {1.0, 1.0}), InvalidArgument);
}

TEST_CASE("u_PM is strictly increasing in one dimension") {
  for (const Prior& p : {Prior::weighted_l1({2.0}), Prior::ball(1.0, 1), Prior::quadratic(2.0, 1)}) {
    double prev = -1e300;
    for (double x = -8.0; x <= 8.0; x += 0.25) {
      const double u = posterior_summary_quadrature(p, Vec{x}, {1.0, 0.3}).u_pm[0];
      CHECK(u > prev);
      prev = u;
    }
  }
}

TEST_CASE("monotonicity in eps holds for S/eps but not for S itself") {
  // zero prior: S_eps = 0, so S - (n eps / 2) ln eps = -(eps/2) ln eps rises for eps < 1/e
  auto literal = [](double eps) {
    return posterior_summary_quadrature(Prior::zero(1), Vec{0.3}, {1.0, eps}).s_eps - 0.5 * eps * std::log(eps);
  };
  CHECK(literal(0.1) > literal(0.01));
  // the scaled form decreases for every prior
  Rng rng(31);
  for (const Prior& p : {Prior::zero(1), Prior::weighted_l1({2.0}), Prior::quadratic(1.0, 1), Prior::ball(1.0, 1)}) {
    const double x = rng.uniform(-0.9, 0.9), t = rng.uniform(0.2, 3.0);
    double prev = 1e300;
    for (double eps : {0.01, 0.03, 0.1, 0.3, 1.0, 3.0}) {
      const double v = estimate(p, Vec{x}, {t, eps}, Method::Quadrature).s_eps / eps - 0.5 * std::log(eps);
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("pde residuals shrink at second order") {
  const Prior l1 = Prior::weighted_l1({2.0});
  const double x[1] = {0.7};
  const double r1 = viscous_residual(l1, x, {1.0, 1.0}, 1e-2);
  const double r2 = viscous_residual(l1, x, {1.0, 1.0}, 5e-3);
  CHECK(std::log2(r1 / r2) > 1.5);
  const double h1 = heat_residual(l1, x, {1.0, 1.0}, 1e-2);
  const double h2 = heat_residual(l1, x, {1.0, 1.0}, 5e-3);
  CHECK(std::log2(h1 / h2) > 1.5);
  CHECK_THROWS_AS(viscous_residual(l1, x, {1.0, 1.0}, 2.0), InvalidArgument);
}
