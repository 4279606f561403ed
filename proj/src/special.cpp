#include "hjbd/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace hjbd::special {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// exp(z*z) without the rounding error of forming z*z.
double exp_square(double z) {
  const double hi = z * z;
  const double lo = std::fma(z, z, -hi);
  return std::exp(hi) * (1.0 + lo);
}

// Asymptotic series of erfcx for large positive z.
double erfcx_asymptotic(double z) {
  const double inv2z2 = 1.0 / (2.0 * z * z);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 40; ++k) {
    const double next = -term * (2.0 * k - 1.0) * inv2z2;
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum / (z * std::sqrt(std::numbers::pi));
}

}  // namespace

double erfcx(double z) {
  if (std::isnan(z)) return z;
  if (z < 0.0) {
    if (z < -26.6) return kInf;
    return 2.0 * exp_square(z) - erfcx(-z);
  }
  if (z < 25.0) return exp_square(z) * std::erfc(z);
  return erfcx_asymptotic(z);
}

double log_erfc(double z) {
  if (z < 0.5) return std::log(std::erfc(z));
  return std::log(erfcx(z)) - z * z;
}

double log_normal_sf(double z) {
  if (z == kInf) return -kInf;
  if (z == -kInf) return 0.0;
  return log_erfc(z / std::numbers::sqrt2) - std::numbers::ln2;
}

double log_normal_interval(double a, double b) {
  if (!(a < b)) return -kInf;
  if (a >= 0.0) {
    const double la = log_normal_sf(a);
    const double lb = log_normal_sf(b);
    return la + std::log(-std::expm1(lb - la));
  }
  if (b <= 0.0) return log_normal_interval(-b, -a);
  const double ea = a == -kInf ? 1.0 : std::erf(-a / std::numbers::sqrt2);
  const double eb = b == kInf ? 1.0 : std::erf(b / std::numbers::sqrt2);
  return std::log(0.5 * (ea + eb));
}

double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double soft_threshold(double a, double alpha) {
  if (a > alpha) return a - alpha;
  if (a < -alpha) return a + alpha;
  return 0.0;
}

}  // namespace hjbd::special
