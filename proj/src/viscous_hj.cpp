#include "hjbd/viscous_hj.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hjbd/error.hpp"
#include "hjbd/special.hpp"

namespace hjbd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// log L(z) with L(z) = erfcx(z) / 2.
double log_l(double z) {
  if (z >= 0.0) return std::log(0.5 * special::erfcx(z));
  // L(z) = e^{z^2} (1 - erfc(-z) / 2)
  return z * z + std::log1p(-0.5 * std::erfc(-z));
}

}  // namespace

void EstimatorParams::validate() const {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("t must be positive and finite");
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidArgument("eps must be nonnegative and finite");
}

PosteriorSummary make_summary(std::span<const double> x, const EstimatorParams& p, double s_eps, Vec u_pm,
                              double mse) {
  const double n = static_cast<double>(x.size());
  PosteriorSummary s;
  s.s_eps = s_eps;
  s.log_w_eps = -s_eps / p.eps;
  // S_eps >= 0 holds exactly; anything above 1 is roundoff.
  s.w_eps = std::min(1.0, std::exp(s.log_w_eps));
  s.grad_s_eps = scaled(sub(x, u_pm), 1.0 / p.t);
  s.u_pm = std::move(u_pm);
  s.mse = mse;
  s.laplacian_s_eps = n / p.t - mse / (p.t * p.t * p.eps);
  return s;
}

PosteriorSummary posterior_summary_potential(const Potential& potential, std::span<const double> x,
                                             const EstimatorParams& params, const QuadratureConfig& cfg) {
  params.validate();
  if (params.eps == 0.0) throw InvalidArgument("quadrature needs eps > 0 (eps = 0 is the MAP estimate)");
  const PosteriorMoments m = posterior_moments(potential, x, params.t, params.eps, cfg);
  const double n = static_cast<double>(x.size());
  const double te = params.t * params.eps;
  const double s_eps = m.phi_ref - params.eps * m.log_mass + 0.5 * n * params.eps * std::log(2.0 * std::numbers::pi * te);
  return make_summary(x, params, s_eps, m.mean, m.mse);
}

PosteriorSummary posterior_summary_quadrature(const Prior& prior, std::span<const double> x,
                                              const EstimatorParams& params, const QuadratureConfig& cfg) {
  require_dim(x.size(), prior.dim(), "posterior_summary_quadrature");
  const PriorPotential pot(prior);
  return posterior_summary_potential(pot, x, params, cfg);
}

PosteriorSummary s_eps_closed_quadratic(double m, std::span<const double> x, const EstimatorParams& params) {
  params.validate();
  if (params.eps == 0.0) throw InvalidArgument("closed form needs eps > 0");
  if (!(m >= 0.0)) throw InvalidArgument("Quadratic: m must be nonnegative");
  const double n = static_cast<double>(x.size());
  const double a = 1.0 + m * params.t;
  PosteriorSummary s;
  s.s_eps = m * norm_sq(x) / (2.0 * a) + 0.5 * n * params.eps * std::log1p(m * params.t);
  s.log_w_eps = -s.s_eps / params.eps;
  s.w_eps = std::min(1.0, std::exp(s.log_w_eps));
  s.u_pm = scaled(x, 1.0 / a);
  s.grad_s_eps = scaled(x, m / a);
  s.mse = n * params.t * params.eps / a;
  s.laplacian_s_eps = n * m / a;
  return s;
}

PosteriorSummary u_pm_closed_l1(std::span<const double> lambda, std::span<const double> x,
                                const EstimatorParams& params) {
  params.validate();
  if (params.eps == 0.0) throw InvalidArgument("closed form needs eps > 0");
  require_dim(lambda.size(), x.size(), "u_pm_closed_l1");
  const double t = params.t, eps = params.eps;
  const double s = std::sqrt(2.0 * t * eps);
  PosteriorSummary out;
  out.u_pm.resize(x.size());
  out.grad_s_eps.resize(x.size());
  double s_eps = norm_sq(x) / (2.0 * t);
  double mse = 0.0, lap = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double tl = t * lambda[i];
    const double lp = log_l((x[i] + tl) / s);
    const double lm = log_l((-x[i] + tl) / s);
    const double lsum = special::log_add_exp(lp, lm);
    s_eps -= eps * lsum;
    // (L+ - L-) / (L+ + L-) = tanh((log L+ - log L-) / 2)
    const double d = lp - lm;
    const double r = std::tanh(0.5 * d);
    out.u_pm[i] = x[i] + tl * r;
    out.grad_s_eps[i] = -lambda[i] * r;
    // dR/dx = (2/s) [t lambda sech^2(d/2) / s - 1 / (sqrt(pi) (L+ + L-))]
    const double e = std::exp(-std::abs(d));
    const double sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
    const double dr = (2.0 / s) * (tl * sech2 / s - std::exp(-lsum) / std::sqrt(std::numbers::pi));
    const double du = 1.0 + tl * dr;
    mse += t * eps * du;
    lap += -lambda[i] * dr;
  }
  out.s_eps = s_eps;
  out.log_w_eps = -s_eps / eps;
  out.w_eps = std::min(1.0, std::exp(out.log_w_eps));
  out.mse = std::max(0.0, mse);
  out.laplacian_s_eps = lap;
  return out;
}

bool has_closed_form(const Prior& prior) {
  return prior.is<Prior::Zero>() || prior.is<Prior::Quadratic>() || prior.is<Prior::WeightedL1>();
}

PosteriorSummary estimate(const Prior& prior, std::span<const double> x, const EstimatorParams& params,
                          Method method, const QuadratureConfig& cfg) {
  params.validate();
  require_dim(x.size(), prior.dim(), "estimate");
  if (params.eps == 0.0) {
    EnvelopeResult env = envelope(prior, x, params.t);
    PosteriorSummary s;
    s.s_eps = env.value;
    s.w_eps = kNaN;
    s.log_w_eps = kNaN;
    s.u_pm = std::move(env.minimizer);
    s.grad_s_eps = std::move(env.gradient);
    s.mse = 0.0;
    s.laplacian_s_eps = kNaN;
    return s;
  }
  const bool closed = method == Method::Closed || (method == Method::Auto && has_closed_form(prior));
  if (closed) {
    if (prior.is<Prior::Zero>()) return s_eps_closed_quadratic(0.0, x, params);
    if (const auto* q = std::get_if<Prior::Quadratic>(&prior.kind())) return s_eps_closed_quadratic(q->m, x, params);
    if (const auto* l = std::get_if<Prior::WeightedL1>(&prior.kind())) return u_pm_closed_l1(l->lambda, x, params);
    throw InvalidArgument("no closed form for the " + prior.name() + " prior");
  }
  return posterior_summary_quadrature(prior, x, params, cfg);
}

double k_eps(const Prior& prior, std::span<const double> x, const EstimatorParams& params, Method method,
             const QuadratureConfig& cfg) {
  if (params.eps == 0.0) throw InvalidArgument("k_eps needs eps > 0");
  return 0.5 * norm_sq(x) - params.t * estimate(prior, x, params, method, cfg).s_eps;
}

KEpsTable k_eps_table(const Prior& prior, const EstimatorParams& params, const Grid1D& grid, Method method,
                      const QuadratureConfig& cfg) {
  if (prior.dim() != 1) throw InvalidArgument("k_eps_table: prior must be one-dimensional");
  KEpsTable table{grid, Vec(grid.count)};
  for (std::size_t i = 0; i < grid.count; ++i) {
    const double x[1] = {grid.values[i]};
    table.values[i] = k_eps(prior, x, params, method, cfg);
  }
  return table;
}

double k_eps_conjugate(const KEpsTable& table, double y) { return discrete_legendre(table.grid, table.values, y).value; }

double k_eps_conjugate_1d(const Prior& prior, double y, const EstimatorParams& params, const Grid1D& grid,
                          const QuadratureConfig& cfg) {
  return k_eps_conjugate(k_eps_table(prior, params, grid, Method::Auto, cfg), y);
}

std::vector<Vec> pm_via_moreau_smoothing(const Prior& prior, std::span<const double> x,
                                         const EstimatorParams& params, std::span<const double> mu_seq,
                                         const QuadratureConfig& cfg) {
  require_dim(x.size(), prior.dim(), "pm_via_moreau_smoothing");
  std::vector<Vec> out;
  out.reserve(mu_seq.size());
  for (double mu : mu_seq) {
    const SmoothedPotential pot(prior, mu);
    out.push_back(posterior_summary_potential(pot, x, params, cfg).u_pm);
  }
  return out;
}

Vec mean_min_subgradient(const Prior& prior, std::span<const double> x, const EstimatorParams& params,
                         const QuadratureConfig& cfg) {
  params.validate();
  require_dim(x.size(), prior.dim(), "mean_min_subgradient");
  if (!prior.full_domain())
    throw InvalidArgument("mean_min_subgradient: the representation needs dom J to be the whole space");
  if (params.eps == 0.0) throw InvalidArgument("mean_min_subgradient needs eps > 0");
  const PriorPotential pot(prior);
  const std::size_t n = x.size();
  const MomentFn fn = [&](std::span<const double> y, std::span<double> out) {
    const Vec g = prior.min_subgradient(y);
    std::copy(g.begin(), g.end(), out.begin());
  };
  return posterior_moments(pot, x, params.t, params.eps, cfg, fn, n).extras;
}

namespace {

struct Stencil {
  double center;
  double t_plus, t_minus;
  Vec x_plus, x_minus;
};

Stencil sample_stencil(const Prior& prior, std::span<const double> x, const EstimatorParams& p, double h,
                       Method method, const QuadratureConfig& cfg) {
  if (!(h > 0.0) || h >= p.t) throw InvalidArgument("residual: step must lie in (0, t)");
  auto s = [&](std::span<const double> z, double t) {
    return estimate(prior, z, EstimatorParams{t, p.eps}, method, cfg).s_eps;
  };
  Stencil st;
  st.center = s(x, p.t);
  st.t_plus = s(x, p.t + h);
  st.t_minus = s(x, p.t - h);
  Vec z(x.begin(), x.end());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double xi = z[i];
    z[i] = xi + h;
    st.x_plus.push_back(s(z, p.t));
    z[i] = xi - h;
    st.x_minus.push_back(s(z, p.t));
    z[i] = xi;
  }
  return st;
}

}  // namespace

double viscous_residual(const Prior& prior, std::span<const double> x, const EstimatorParams& params, double h,
                        Method method, const QuadratureConfig& cfg) {
  params.validate();
  if (params.eps == 0.0) throw InvalidArgument("viscous_residual needs eps > 0");
  const Stencil st = sample_stencil(prior, x, params, h, method, cfg);
  const double dt = (st.t_plus - st.t_minus) / (2.0 * h);
  double grad_sq = 0.0, lap = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double g = (st.x_plus[i] - st.x_minus[i]) / (2.0 * h);
    grad_sq += g * g;
    lap += (st.x_plus[i] - 2.0 * st.center + st.x_minus[i]) / (h * h);
  }
  return std::abs(dt + 0.5 * grad_sq - 0.5 * params.eps * lap);
}

double heat_residual(const Prior& prior, std::span<const double> x, const EstimatorParams& params, double h,
                     Method method, const QuadratureConfig& cfg) {
  params.validate();
  if (params.eps == 0.0) throw InvalidArgument("heat_residual needs eps > 0");
  const Stencil st = sample_stencil(prior, x, params, h, method, cfg);
  // w values relative to w(x, t), which keeps them representable.
  const double eps = params.eps;
  auto rel = [&](double s) { return std::expm1(-(s - st.center) / eps); };  // w / w0 - 1
  const double dt = (rel(st.t_plus) - rel(st.t_minus)) / (2.0 * h);
  double lap = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) lap += (rel(st.x_plus[i]) + rel(st.x_minus[i])) / (h * h);
  return std::abs(dt - 0.5 * eps * lap);
}

}  // namespace hjbd
