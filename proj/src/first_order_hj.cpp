#include "hjbd/first_order_hj.hpp"

#include <cmath>
#include <limits>

#include "hjbd/error.hpp"

namespace hjbd {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

EnvelopeResult envelope(const Prior& prior, std::span<const double> x, double t) {
  if (!(t > 0.0)) throw InvalidArgument("envelope: t must be positive");
  EnvelopeResult r;
  r.minimizer = prior.prox(x, t);
  r.gradient = scaled(sub(x, r.minimizer), 1.0 / t);
  r.value = dist_sq(x, r.minimizer) / (2.0 * t) + prior.eval(r.minimizer);
  return r;
}

Grid1D Grid1D::uniform(double lo, double hi, std::size_t count) {
  if (count < 3) throw InvalidArgument("Grid1D: need at least 3 nodes");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw InvalidArgument("Grid1D: need lo < hi");
  Grid1D g{lo, hi, count, Vec(count)};
  const double h = g.spacing();
  for (std::size_t i = 0; i < count; ++i) g.values[i] = lo + h * static_cast<double>(i);
  g.values.back() = hi;
  return g;
}

LegendreValue discrete_legendre(const Grid1D& grid, std::span<const double> f, double p,
                                bool endpoint_is_error) {
  require_dim(f.size(), grid.count, "discrete_legendre");
  LegendreValue best{-kInf, 0};
  for (std::size_t i = 0; i < grid.count; ++i) {
    if (f[i] == kInf) continue;
    const double v = p * grid.values[i] - f[i];
    if (v > best.value) best = {v, i};
  }
  if (best.value == -kInf) throw GridError("discrete_legendre: function is +inf on the whole grid");
  if (endpoint_is_error && (best.index == 0 || best.index + 1 == grid.count)) {
    throw GridError("discrete_legendre: maximizer on the grid boundary at p = " + std::to_string(p));
  }
  return best;
}

HopfCheck hopf_check_1d(const Prior& prior, const Grid1D& grid, double x, double t) {
  if (prior.dim() != 1) throw InvalidArgument("hopf_check_1d: prior must be one-dimensional");
  const double xv[1] = {x};
  HopfCheck out{envelope(prior, xv, t).value, 0.0};

  Vec j(grid.count);
  for (std::size_t i = 0; i < grid.count; ++i) {
    const double y[1] = {grid.values[i]};
    j[i] = prior.eval(y);
  }
  // Conjugate of J sampled on the same grid, used as the dual variable range.
  // For p outside dom J* the inner argmax runs into the boundary; that is expected.
  Vec h(grid.count);
  for (std::size_t k = 0; k < grid.count; ++k) {
    const double p = grid.values[k];
    h[k] = 0.5 * t * p * p + discrete_legendre(grid, j, p, false).value;
  }
  out.hopf = discrete_legendre(grid, h, x).value;
  return out;
}

std::vector<Vec> grad_s0_limit_check(const Prior& prior, std::span<const double> y,
                                     std::span<const double> t_seq) {
  std::vector<Vec> out;
  out.reserve(t_seq.size());
  for (double t : t_seq) out.push_back(envelope(prior, y, t).gradient);
  return out;
}

double first_order_residual(const Prior& prior, std::span<const double> x, double t, double hx,
                            double ht) {
  auto s0 = [&](std::span<const double> z, double tt) { return envelope(prior, z, tt).value; };
  const double dt = (s0(x, t + ht) - s0(x, t - ht)) / (2.0 * ht);
  Vec z(x.begin(), x.end());
  double grad_sq = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double xi = z[i];
    z[i] = xi + hx;
    const double fp = s0(z, t);
    z[i] = xi - hx;
    const double fm = s0(z, t);
    z[i] = xi;
    const double g = (fp - fm) / (2.0 * hx);
    grad_sq += g * g;
  }
  return std::abs(dt + 0.5 * grad_sq);
}

}  // namespace hjbd
