#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "hjbd/special.hpp"

using namespace hjbd::special;

namespace {
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
}  // namespace

TEST_CASE("erfcx matches exp(z^2) erfc(z) where the direct form is accurate") {
  for (double z = -5.0; z <= 5.0; z += 0.125) {
    const double direct = std::exp(z * z) * std::erfc(z);
    CHECK(rel(erfcx(z), direct) < 1e-13);
  }
}

TEST_CASE("erfcx follows its asymptotic series for large arguments") {
  for (double z : {100.0, 1e3, 1e6}) {
    const double z2 = z * z;
    const double series = (1.0 - 0.5 / z2 + 0.75 / (z2 * z2) - 1.875 / (z2 * z2 * z2)) / (z * std::sqrt(std::numbers::pi));
    CHECK(rel(erfcx(z), series) < 1e-12);
  }
  CHECK(std::isfinite(erfcx(1e300)));
}

TEST_CASE("log_erfc is finite deep in both tails") {
  CHECK(log_erfc(0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(log_erfc(-40.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  for (double z : {1.0, 3.0, 5.0}) CHECK(rel(log_erfc(z), std::log(std::erfc(z))) < 1e-13);
  // log erfc(z) ~ -z^2 - log(z sqrt(pi)) for large z
  const double z = 1e4;
  CHECK(log_erfc(z) == doctest::Approx(-z * z - std::log(z * std::sqrt(std::numbers::pi))).epsilon(1e-14));
}

TEST_CASE("normal tail and interval logs") {
  for (double z : {-3.0, -0.5, 0.0, 1.0, 4.0}) {
    CHECK(rel(log_normal_sf(z), std::log(0.5 * std::erfc(z / std::sqrt(2.0)))) < 1e-13);
  }
  auto cdf = [](double v) { return 0.5 * std::erfc(-v / std::sqrt(2.0)); };
  CHECK(rel(log_normal_interval(-1.0, 2.0), std::log(cdf(2.0) - cdf(-1.0))) < 1e-13);
  CHECK(rel(log_normal_interval(0.5, 0.75), std::log(cdf(0.75) - cdf(0.5))) < 1e-12);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(log_normal_interval(-inf, inf) == doctest::Approx(0.0));
  CHECK(log_normal_interval(-inf, 0.0) == doctest::Approx(std::log(0.5)));
  // both bounds far in the upper tail: subtraction of tails must stay accurate
  const double far = log_normal_interval(40.0, 41.0);
  CHECK(std::isfinite(far));
  CHECK(far == doctest::Approx(log_normal_sf(40.0)).epsilon(1e-12));
  // mirror symmetry
  CHECK(log_normal_interval(-41.0, -40.0) == doctest::Approx(far).epsilon(1e-14));
}

TEST_CASE("log_add_exp") {
  CHECK(log_add_exp(0.0, 0.0) == doctest::Approx(std::log(2.0)));
  CHECK(log_add_exp(1000.0, 1000.0) == doctest::Approx(1000.0 + std::log(2.0)));
  CHECK(log_add_exp(-1e308, 3.0) == doctest::Approx(3.0));
  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK(log_add_exp(ninf, 2.0) == 2.0);
  CHECK(log_add_exp(ninf, ninf) == ninf);
}

TEST_CASE("soft threshold") {
  CHECK(soft_threshold(0.5, 1.0) == 0.0);
  CHECK(soft_threshold(-0.5, 1.0) == 0.0);
  CHECK(soft_threshold(5.0, 2.5) == 2.5);
  CHECK(soft_threshold(-5.0, 2.5) == -2.5);
  CHECK(soft_threshold(1.0, 1.0) == 0.0);
}
