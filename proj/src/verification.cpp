#include "hjbd/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "hjbd/error.hpp"
#include "hjbd/quadrature.hpp"
#include "hjbd/special.hpp"

namespace hjbd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlack = 1e-9;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

std::string fmt(std::span<const double> v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + ")";
}

// Counts failures and keeps the first one for the report.
struct Tally {
  int total = 0;
  int failures = 0;
  std::string first;

  void record(bool ok, const std::string& what) {
    ++total;
    if (ok) return;
    if (failures++ == 0) first = what;
  }
  bool passed() const { return failures == 0; }
  std::string summary() const {
    std::string s = std::to_string(total - failures) + "/" + std::to_string(total) + " cases passed";
    if (failures) s += "; first failure: " + first;
    return s;
  }
};

Vec draw_x(std::size_t n, Rng& rng, double x_max) {
  Vec x(n);
  for (double& v : x) v = rng.uniform(-x_max, x_max);
  return x;
}

EstimatorParams draw_params(Rng& rng, const TrialRanges& r) {
  EstimatorParams p;
  p.t = rng.log_uniform(r.t_lo, r.t_hi);
  p.eps = rng.log_uniform(r.eps_lo, r.eps_hi);
  return p;
}

// A uniformly random point well inside the domain.
Vec draw_interior(const Prior& prior, Rng& rng, double x_max) {
  const std::size_t n = prior.dim();
  if (const auto* b = std::get_if<Prior::BallIndicator>(&prior.kind())) {
    Vec x;
    do {
      x = draw_x(n, rng, 0.9 * b->radius);
    } while (norm(x) >= 0.9 * b->radius);
    return x;
  }
  return draw_x(n, rng, x_max);
}

// Minimal subgradient at quadrature nodes; nodes of the ball may sit a rounding
// error outside the sphere, where the indicator has subgradient 0 anyway.
Vec pi_at(const Prior& prior, std::span<const double> y) {
  if (prior.is<Prior::BallIndicator>()) return Vec(y.size(), 0.0);
  return prior.min_subgradient(y);
}

double j_at(const Prior& prior, std::span<const double> y) {
  if (prior.is<Prior::BallIndicator>()) return 0.0;
  return prior.eval(y);
}

std::string point(std::span<const double> x, const EstimatorParams& p) {
  return "x=" + fmt(x) + " t=" + fmt(p.t) + " eps=" + fmt(p.eps);
}

double s_eps_from(const PosteriorMoments& m, std::size_t n, const EstimatorParams& p) {
  return m.phi_ref - p.eps * m.log_mass +
         0.5 * static_cast<double>(n) * p.eps * std::log(2.0 * std::numbers::pi * p.t * p.eps);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CheckResult named(std::string name) {
  CheckResult c;
  c.name = std::move(name);
  return c;
}

double observed_order(std::span<const double> r) {
  double order = kInf;
  for (std::size_t k = 0; k + 1 < r.size(); ++k) order = std::min(order, std::log2(r[k] / r[k + 1]));
  return order;
}

}  // namespace

bool VerificationReport::all_passed() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

namespace {

nlohmann::ordered_json check_json(const CheckResult& c) {
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["passed"] = c.passed;
  j["observed"] = c.observed;
  j["bound_or_target"] = c.bound_or_target;
  j["tolerance"] = c.tolerance;
  j["details"] = c.details;
  return j;
}

}  // namespace

std::string to_json(const CheckResult& check, int indent) { return check_json(check).dump(indent); }

std::string to_json(const VerificationReport& report, int indent) {
  nlohmann::ordered_json j;
  j["checks"] = nlohmann::ordered_json::array();
  for (const CheckResult& c : report.checks) j["checks"].push_back(check_json(c));
  j["seed"] = report.seed;
  j["timestamp"] = report.timestamp;
  return j.dump(indent);
}

std::string iso8601_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end != env && *end == '\0') now = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

PosteriorSummary estimate_for_check(const Prior& prior, std::span<const double> x, const EstimatorParams& params) {
  const bool quad = prior.dim() == 1 || !has_closed_form(prior);
  return estimate(prior, x, params, quad ? Method::Quadrature : Method::Closed);
}

// ---------------------------------------------------------------- bounds

CheckResult check_mse_bound(const Prior& prior, int trials, Rng& rng, const TrialRanges& ranges) {
  const std::size_t n = prior.dim();
  const double m = prior.strong_convexity();
  const bool equality = prior.is<Prior::Quadratic>() || prior.is<Prior::Zero>();
  CheckResult res = named("mse_bound[" + prior.name() + "]");
  res.tolerance = kSlack;
  Tally tally;
  double worst = 0.0, worst_eq = 0.0;
  for (int k = 0; k < trials; ++k) {
    const Vec x = draw_x(n, rng, ranges.x_max);
    const EstimatorParams p = draw_params(rng, ranges);
    const PosteriorSummary s = estimate_for_check(prior, x, p);
    const double bound = static_cast<double>(n) * p.t * p.eps / (1.0 + m * p.t);
    const double ratio = s.mse / bound;
    worst = std::max(worst, ratio);
    bool ok = ratio <= 1.0 + kSlack;
    if (equality) {
      worst_eq = std::max(worst_eq, std::abs(ratio - 1.0));
      ok = ok && std::abs(ratio - 1.0) <= kSlack;
    }
    tally.record(ok, point(x, p) + " mse=" + fmt(s.mse) + " bound=" + fmt(bound));
  }
  res.passed = tally.passed();
  res.observed = {worst};
  res.bound_or_target = {1.0};
  res.details = "max MSE / (n t eps / (1 + m t)); " + tally.summary();
  if (equality) res.details += "; equality case, max relative deviation " + fmt(worst_eq);
  return res;
}

CheckResult check_map_pm_distance(const Prior& prior, int trials, Rng& rng, const TrialRanges& ranges) {
  const std::size_t n = prior.dim();
  const double m = prior.strong_convexity();
  CheckResult res = named("map_pm_distance[" + prior.name() + "]");
  res.tolerance = kSlack;
  Tally tally;
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    const Vec x = draw_x(n, rng, ranges.x_max);
    const EstimatorParams p = draw_params(rng, ranges);
    const PosteriorSummary s = estimate_for_check(prior, x, p);
    const Vec map = prior.prox(x, p.t);
    const double d2 = dist_sq(map, s.u_pm);
    const double bound = static_cast<double>(n) * p.t * p.eps / (1.0 + m * p.t);
    worst = std::max(worst, d2 / bound);
    tally.record(d2 <= bound * (1.0 + kSlack) + kSlack,
                 point(x, p) + " |u_map - u_pm|^2=" + fmt(d2) + " bound=" + fmt(bound));
  }
  res.passed = tally.passed();
  res.observed = {worst};
  res.bound_or_target = {1.0};
  res.details = "max |u_MAP - u_PM|^2 / (n t eps / (1 + m t)); " + tally.summary();
  return res;
}

CheckResult check_nonexpansive_monotone(const Prior& prior, int trials, Rng& rng, const TrialRanges& ranges) {
  const std::size_t n = prior.dim();
  CheckResult res = named("nonexpansive_monotone[" + prior.name() + "]");
  res.tolerance = kSlack;
  Tally tally;
  double min_inner = kInf, max_excess = -kInf;
  for (int k = 0; k < trials; ++k) {
    const Vec x = draw_x(n, rng, ranges.x_max);
    const EstimatorParams p = draw_params(rng, ranges);
    const double scale = rng.log_uniform(1e-3, 10.0);
    Vec d = draw_x(n, rng, scale);
    Vec x2 = x;
    for (std::size_t i = 0; i < n; ++i) x2[i] += d[i];
    const Vec du = sub(estimate_for_check(prior, x2, p).u_pm, estimate_for_check(prior, x, p).u_pm);
    const double inner = dot(du, d);
    const double excess = norm(du) - norm(d);
    // scale-free view for the report
    min_inner = std::min(min_inner, inner / norm_sq(d));
    max_excess = std::max(max_excess, excess / norm(d));
    tally.record(inner >= -kSlack && excess <= kSlack,
                 point(x, p) + " d=" + fmt(d) + " <du,d>=" + fmt(inner) + " |du|-|d|=" + fmt(excess));
  }
  res.passed = tally.passed();
  res.observed = {min_inner, max_excess};
  res.bound_or_target = {0.0, 0.0};
  res.details = "min <du,d>/|d|^2 and max (|du|-|d|)/|d|; " + tally.summary();
  return res;
}

CheckResult check_t_to_zero(const Prior& prior, std::span<const double> x, double eps, std::span<const double> t_seq,
                            const std::vector<Vec>& d_seq) {
  require_dim(x.size(), prior.dim(), "check_t_to_zero");
  if (d_seq.size() != t_seq.size() || t_seq.empty())
    throw InvalidArgument("check_t_to_zero: need one direction per time step");
  CheckResult res = named("t_to_zero[" + prior.name() + "]");
  res.tolerance = kSlack;
  const DomainLocation loc = prior.domain_contains(x);
  if (loc == DomainLocation::Outside) throw InvalidArgument("check_t_to_zero: x must lie in dom J");
  if (loc == DomainLocation::Boundary) {
    res.passed = true;
    res.details = "skipped: x on the boundary of dom J";
    return res;
  }
  const double n = static_cast<double>(x.size());
  const double m = prior.strong_convexity();
  Tally tally;
  double last = 0.0;
  for (std::size_t k = 0; k < t_seq.size(); ++k) {
    const double t = t_seq[k];
    require_dim(d_seq[k].size(), x.size(), "check_t_to_zero direction");
    const Vec step = scaled(d_seq[k], t);
    Vec z(x.begin(), x.end());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += step[i];
    const EstimatorParams p{t, eps};
    const Vec u = estimate_for_check(prior, z, p).u_pm;
    const double dist = std::sqrt(dist_sq(u, x));
    const double env = norm(step) + std::sqrt(dist_sq(z, prior.prox(z, t))) + std::sqrt(n * t * eps / (1.0 + m * t));
    res.observed.push_back(dist);
    res.bound_or_target.push_back(env);
    tally.record(dist <= env + kSlack, "t=" + fmt(t) + " |u_pm - x|=" + fmt(dist) + " envelope=" + fmt(env));
    last = dist;
  }
  const double t_last = t_seq.back();
  const double final_bound = 10.0 * std::sqrt(n * t_last * eps);
  tally.record(last < final_bound, "final distance " + fmt(last) + " >= " + fmt(final_bound));
  res.passed = tally.passed();
  res.details = "|u_PM(x + t d, t) - x| per step against the triangle envelope; final bound " + fmt(final_bound) +
                "; " + tally.summary();
  return res;
}

CheckResult check_t_to_zero_trials(const Prior& prior, int trials, Rng& rng, const TrialRanges& ranges) {
  const std::size_t n = prior.dim();
  CheckResult res = named("t_to_zero_trials[" + prior.name() + "]");
  res.tolerance = kSlack;
  Vec t_seq;
  for (int k = 0; k <= 12; ++k) t_seq.push_back(std::pow(10.0, -0.5 * k));
  Tally tally;
  double worst_env = 0.0, worst_final = 0.0;
  for (int k = 0; k < trials; ++k) {
    const Vec x = draw_interior(prior, rng, ranges.x_max);
    const double eps = rng.log_uniform(ranges.eps_lo, ranges.eps_hi);
    std::vector<Vec> d_seq;
    for (std::size_t j = 0; j < t_seq.size(); ++j) d_seq.push_back(draw_x(n, rng, 1.0));
    const CheckResult one = check_t_to_zero(prior, x, eps, t_seq, d_seq);
    for (std::size_t j = 0; j < one.observed.size(); ++j)
      worst_env = std::max(worst_env, one.observed[j] / one.bound_or_target[j]);
    worst_final = std::max(worst_final, one.observed.back() / (10.0 * std::sqrt(n * t_seq.back() * eps)));
    tally.record(one.passed, "x=" + fmt(x) + " eps=" + fmt(eps) + ": " + one.details);
  }
  res.passed = tally.passed();
  res.observed = {worst_env, worst_final};
  res.bound_or_target = {1.0, 1.0};
  res.details = "max distance/envelope and final distance/(10 sqrt(n t eps)) with t down to 1e-6; " + tally.summary();
  return res;
}

CheckResult check_eps_to_zero(const Prior& prior, const std::vector<Vec>& xs, std::span<const double> ts,
                              std::span<const double> eps_seq) {
  if (xs.empty() || ts.empty() || eps_seq.empty()) throw InvalidArgument("check_eps_to_zero: empty grid");
  CheckResult res = named("eps_to_zero[" + prior.name() + "]");
  res.tolerance = kSlack;
  const double n = static_cast<double>(prior.dim());
  // MAP values do not depend on eps
  std::vector<EnvelopeResult> map;
  for (double t : ts)
    for (const Vec& x : xs) map.push_back(envelope(prior, x, t));
  Vec sup_s, sup_u;
  Tally tally;
  for (std::size_t e = 0; e < eps_seq.size(); ++e) {
    double gs = 0.0, gu = 0.0;
    std::size_t idx = 0;
    for (double t : ts) {
      for (const Vec& x : xs) {
        const PosteriorSummary s = estimate_for_check(prior, x, EstimatorParams{t, eps_seq[e]});
        const EnvelopeResult& env = map[idx++];
        gs = std::max(gs, std::abs(s.s_eps - env.value));
        const double du = std::sqrt(dist_sq(s.u_pm, env.minimizer));
        gu = std::max(gu, du);
        if (e + 1 == eps_seq.size()) {
          const double bound = std::sqrt(n * t * eps_seq[e]);
          tally.record(du <= bound + kSlack, "x=" + fmt(x) + " t=" + fmt(t) + " final |u_pm - u_map|=" + fmt(du) +
                                                 " > " + fmt(bound));
        }
      }
    }
    if (e > 0) {
      tally.record(gs <= sup_s.back() + kSlack,
                   "sup |S_eps - S_0| grew from " + fmt(sup_s.back()) + " to " + fmt(gs) + " at eps=" + fmt(eps_seq[e]));
      tally.record(gu <= sup_u.back() + kSlack,
                   "sup |u_pm - u_map| grew from " + fmt(sup_u.back()) + " to " + fmt(gu) + " at eps=" + fmt(eps_seq[e]));
    }
    sup_s.push_back(gs);
    sup_u.push_back(gu);
  }
  res.passed = tally.passed();
  res.observed = sup_s;
  res.observed.insert(res.observed.end(), sup_u.begin(), sup_u.end());
  const double t_max = *std::max_element(ts.begin(), ts.end());
  res.bound_or_target = {std::sqrt(n * t_max * eps_seq.back())};
  res.details = "observed: sup |S_eps - S_0| per eps, then sup |u_PM - u_MAP| per eps; target: sqrt(n t_max eps_last); " +
                tally.summary();
  return res;
}

CheckResult check_topology(const Prior& prior, int trials, Rng& rng, double x_max) {
  const std::size_t n = prior.dim();
  CheckResult res = named("topology[" + prior.name() + "]");
  res.tolerance = kSlack;
  const PriorPotential pot(prior);
  const QuadratureConfig cfg;
  const MomentFn j_fn = [&](std::span<const double> y, std::span<double> out) { out[0] = j_at(prior, y); };
  const auto* ball = std::get_if<Prior::BallIndicator>(&prior.kind());
  Tally tally;
  double max_norm_ratio = 0.0, max_chain = -kInf;
  for (int k = 0; k < trials; ++k) {
    Vec dir(n);
    for (double& v : dir) v = rng.normal();
    const Vec x = scaled(dir, rng.uniform(0.0, x_max) / norm(dir));
    const EstimatorParams p = draw_params(rng, TrialRanges{});
    const PosteriorMoments mom = posterior_moments(pot, x, p.t, p.eps, cfg, j_fn, 1);
    const Vec& u = mom.mean;
    const double s = s_eps_from(mom, n, p);
    const double ej = mom.extras[0];
    const double ju = prior.eval(u);
    const double upper = p.eps * std::expm1(s / p.eps);
    bool ok = prior.domain_contains(u) == DomainLocation::Interior;
    if (ball) {
      const double r = norm(u) / ball->radius;
      max_norm_ratio = std::max(max_norm_ratio, r);
      ok = ok && norm(u) <= ball->radius - kSlack;
    }
    const double scale = std::max(1.0, std::abs(ej));
    ok = ok && ju <= ej + kSlack * scale && ej <= upper + kSlack * scale;
    max_chain = std::max(max_chain, std::max(ju - ej, ej - upper) / scale);
    tally.record(ok, point(x, p) + " u_pm=" + fmt(u) + " J(u)=" + fmt(ju) + " E[J]=" + fmt(ej) +
                         " eps(e^{S/eps}-1)=" + fmt(upper));
  }
  res.passed = tally.passed();
  res.observed = {max_norm_ratio, max_chain};
  res.bound_or_target = {ball ? 1.0 - kSlack / ball->radius : 0.0, 0.0};
  res.details = "max |u_PM|/r (balls only) and max violation of J(u_PM) <= E[J] <= eps(e^{S/eps}-1); " +
                tally.summary();
  return res;
}

// ---------------------------------------------------------------- representation

CheckResult check_representation(const Prior& prior, int trials, Rng& rng, const TrialRanges& ranges) {
  if (!prior.full_domain()) throw InvalidArgument("check_representation: dom J must be the whole space");
  const std::size_t n = prior.dim();
  CheckResult res = named("representation[" + prior.name() + "]");
  res.tolerance = 1e-6;
  const PriorPotential pot(prior);
  const QuadratureConfig cfg;
  Tally tally;
  double worst_grad = 0.0, worst_mse = 0.0;
  for (int k = 0; k < trials; ++k) {
    const Vec x = draw_x(n, rng, ranges.x_max);
    const EstimatorParams p = draw_params(rng, ranges);
    // extras: pi(y) and <pi(y), y - x>
    const MomentFn fn = [&](std::span<const double> y, std::span<double> out) {
      const Vec g = prior.min_subgradient(y);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = g[i];
        s += g[i] * (y[i] - x[i]);
      }
      out[n] = s;
    };
    const PosteriorMoments mom = posterior_moments(pot, x, p.t, p.eps, cfg, fn, n + 1);
    const std::span<const double> msg(mom.extras.data(), n);
    bool ok = std::all_of(mom.extras.begin(), mom.extras.end(), [](double v) { return std::isfinite(v); });

    const double h = 0.05 * std::sqrt(p.t * p.eps);
    Vec z = x;
    auto s_at = [&](std::size_t i, double off) {
      z[i] = x[i] + off;
      const double v = estimate_for_check(prior, z, p).s_eps;
      z[i] = x[i];
      return v;
    };
    double grad_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = (-s_at(i, 2 * h) + 8 * s_at(i, h) - 8 * s_at(i, -h) + s_at(i, -2 * h)) / (12 * h);
      grad_err = std::max(grad_err, std::abs(g - msg[i]) / std::max(1.0, std::abs(msg[i])));
    }
    Vec u_minus_x = sub(mom.mean, x);
    const double e_pi_dev = mom.extras[n] - dot(msg, u_minus_x);  // E<pi(y), y - u_PM>
    const double nte = static_cast<double>(n) * p.t * p.eps;
    const double mse_rep = nte - p.t * e_pi_dev;
    const double mse_err = std::abs(mse_rep - mom.mse) / std::max(1.0, nte);
    worst_grad = std::max(worst_grad, grad_err);
    worst_mse = std::max(worst_mse, mse_err);
    ok = ok && grad_err <= res.tolerance && mse_err <= res.tolerance;
    tally.record(ok, point(x, p) + " gradient error " + fmt(grad_err) + ", MSE identity error " + fmt(mse_err));
  }
  res.passed = tally.passed();
  res.observed = {worst_grad, worst_mse};
  res.bound_or_target = {0.0, 0.0};
  res.details =
      "relative errors of the finite-difference gradient against E[pi(y)] and of n t eps - t E<pi(y), y - u_PM> "
      "against the MSE; " +
      tally.summary();
  return res;
}

CheckResult check_monotonicity_inequality(const Prior& prior, int trials, Rng& rng, const TrialRanges& ranges) {
  const std::size_t n = prior.dim();
  const double m = prior.strong_convexity();
  CheckResult res = named("monotonicity_inequality[" + prior.name() + "]");
  res.tolerance = kSlack;
  const PriorPotential pot(prior);
  const QuadratureConfig cfg;
  const auto* ball = std::get_if<Prior::BallIndicator>(&prior.kind());
  auto into_domain = [&](Vec y) {
    if (ball && norm(y) > ball->radius) y = scaled(y, ball->radius / norm(y));
    return y;
  };
  Tally tally;
  double worst_left = -kInf, worst_right = -kInf;
  for (int k = 0; k < trials; ++k) {
    const Vec x = draw_x(n, rng, ranges.x_max);
    const EstimatorParams p = draw_params(rng, ranges);
    const Vec u = posterior_moments(pot, x, p.t, p.eps, cfg).mean;
    Vec y0;
    switch (k % 4) {
      case 0: y0 = u; break;
      case 1: y0 = into_domain(x); break;
      case 2: y0 = prior.prox(x, p.t); break;
      default: {
        y0 = u;
        for (double& v : y0) v += rng.uniform(-5.0, 5.0);
        y0 = into_domain(y0);
      }
    }
    const MomentFn fn = [&](std::span<const double> y, std::span<double> out) {
      const Vec g = pi_at(prior, y);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += ((y[i] - x[i]) / p.t + g[i]) * (y[i] - y0[i]);
      out[0] = s;
    };
    const PosteriorMoments mom = posterior_moments(pot, x, p.t, p.eps, cfg, fn, 1);
    Vec phi0 = pi_at(prior, y0);
    for (std::size_t i = 0; i < n; ++i) phi0[i] += (y0[i] - x[i]) / p.t;
    const double cross = dot(phi0, sub(mom.mean, y0));
    const double lhs = (1.0 + m * p.t) / p.t * (mom.mse + dist_sq(mom.mean, y0));
    const double mid = mom.extras[0] - cross;
    const double rhs = static_cast<double>(n) * p.eps - cross;
    const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs), std::abs(cross)});
    worst_left = std::max(worst_left, (lhs - mid) / scale);
    worst_right = std::max(worst_right, (mid - rhs) / scale);
    tally.record(lhs <= mid + kSlack * scale && mid <= rhs + kSlack * scale,
                 point(x, p) + " y0=" + fmt(y0) + " chain " + fmt(lhs) + " <= " + fmt(mid) + " <= " + fmt(rhs));
  }
  res.passed = tally.passed();
  res.observed = {worst_left, worst_right};
  res.bound_or_target = {0.0, 0.0};
  res.details = "max scaled violations of the left and right inequalities; " + tally.summary();
  return res;
}

CheckResult check_bregman_risk_1d(const Prior& prior, double x, double t, double eps, const Grid1D& grid) {
  if (prior.dim() != 1) throw InvalidArgument("check_bregman_risk_1d: prior must be one-dimensional");
  if (!prior.full_domain()) throw InvalidArgument("check_bregman_risk_1d: dom J must be the whole line");
  CheckResult res = named("bregman_risk[" + prior.name() + "]");
  const PriorPotential pot(prior);
  auto big_phi = [&](double y) {
    const double yv[1] = {y};
    return (x - y) * (x - y) / (2.0 * t) + prior.eval(yv);
  };
  auto small_phi = [&](double y) {
    const double yv[1] = {y};
    return (y - x) / t + prior.min_subgradient(yv)[0];
  };
  const MomentFn fn = [&](std::span<const double> y, std::span<double> out) {
    const double f = small_phi(y[0]);
    out[0] = big_phi(y[0]);
    out[1] = f;
    out[2] = f * y[0];
  };
  const PosteriorMoments mom = posterior_moments(pot, std::span<const double>(&x, 1), t, eps, QuadratureConfig{}, fn, 3);
  const double e_big = mom.extras[0], e_phi = mom.extras[1], e_phi_y = mom.extras[2];
  // E[D(u, phi(y))] with D(u, phi(y)) = Phi(u) - Phi(y) - phi(y) (u - y)
  std::size_t best = 0;
  double best_risk = kInf;
  for (std::size_t i = 0; i < grid.count; ++i) {
    const double u = grid.values[i];
    const double risk = big_phi(u) - e_big - u * e_phi + e_phi_y;
    if (risk < best_risk) {
      best_risk = risk;
      best = i;
    }
  }
  if (best == 0 || best + 1 == grid.count)
    throw GridError("check_bregman_risk_1d: risk minimized on the grid boundary at u=" + fmt(grid.values[best]));
  const double xv[1] = {x};
  const double map = prior.prox(xv, t)[0];
  const double h = grid.spacing();
  const double argmin = grid.values[best];
  const double tol = kSlack * std::max(1.0, std::abs(e_big));
  res.passed = std::abs(argmin - map) <= h * (1.0 + 1e-9) && best_risk >= -tol;
  res.observed = {argmin, best_risk};
  res.bound_or_target = {map, 0.0};
  res.tolerance = h;
  res.details = "grid argmin of the expected Bregman loss against u_MAP (tolerance one cell), and its minimum value "
                "(nonnegative); x=" + fmt(x) + " t=" + fmt(t) + " eps=" + fmt(eps) + " E[phi]=" + fmt(e_phi);
  return res;
}

CheckResult check_moreau_decomposition_1d(const Prior& prior, const Grid1D& x_grid, double t, double eps,
                                          const MoreauGrids& grids) {
  if (prior.dim() != 1) throw InvalidArgument("check_moreau_decomposition_1d: prior must be one-dimensional");
  CheckResult res = named("moreau_decomposition[" + prior.name() + "]");
  res.tolerance = 1e-4;
  const EstimatorParams p{t, eps};
  auto u_pm = [&](double x) {
    const double xv[1] = {x};
    return estimate(prior, xv, p).u_pm[0];
  };
  // outer grid over y, covering u_PM of the checked range with a margin
  const double hy = grids.y_spacing;
  const double y_lo = u_pm(x_grid.lo) - grids.y_margin;
  const std::size_t y_count =
      static_cast<std::size_t>(std::ceil((u_pm(x_grid.hi) + grids.y_margin - y_lo) / hy)) + 1;
  const Grid1D y_grid = Grid1D::uniform(y_lo, y_lo + hy * static_cast<double>(y_count - 1), y_count);
  // K table wide enough that the conjugate's maximizer x* = u_PM^{-1}(y) is interior
  const double hk = grids.k_spacing;
  double a = x_grid.lo - 1.0, b = x_grid.hi + 1.0;
  for (double step = 1.0; u_pm(a) > y_grid.lo - 10 * hk; step *= 2) a -= step;
  for (double step = 1.0; u_pm(b) < y_grid.hi + 10 * hk; step *= 2) b += step;
  const std::size_t k_count = static_cast<std::size_t>(std::ceil((b - a) / hk)) + 1;
  const Grid1D k_grid = Grid1D::uniform(a, a + hk * static_cast<double>(k_count - 1), k_count);
  const KEpsTable table = k_eps_table(prior, p, k_grid);

  Vec g(y_count);  // K*(y) - y^2/2
  for (std::size_t j = 0; j < y_count; ++j) {
    const double y = y_grid.values[j];
    g[j] = k_eps_conjugate(table, y) - 0.5 * y * y;
  }
  Tally tally;
  double worst_identity = 0.0, worst_argmin = 0.0;
  for (double x : x_grid.values) {
    // (x - y)^2/2 + g(y)
    std::size_t best = 0;
    double best_v = kInf;
    for (std::size_t j = 0; j < y_count; ++j) {
      const double d = x - y_grid.values[j];
      const double v = 0.5 * d * d + g[j];
      if (v < best_v) {
        best_v = v;
        best = j;
      }
    }
    const double xv[1] = {x};
    const PosteriorSummary s = estimate_for_check(prior, xv, p);
    const double err = std::abs(best_v - t * s.s_eps);
    const double off = std::abs(y_grid.values[best] - s.u_pm[0]) / hy;
    worst_identity = std::max(worst_identity, err);
    worst_argmin = std::max(worst_argmin, off);
    const bool interior = best > 0 && best + 1 < y_count;
    tally.record(interior && err <= res.tolerance && off <= 1.0 + 1e-9,
                 "x=" + fmt(x) + " min=" + fmt(best_v) + " t S_eps=" + fmt(t * s.s_eps) + " argmin=" +
                     fmt(y_grid.values[best]) + " u_pm=" + fmt(s.u_pm[0]));
  }
  // second differences of K* - y^2/2; K* from a table of spacing hk is exact up to hk^2/8
  double min_second = kInf;
  for (std::size_t j = 1; j + 1 < y_count; ++j) min_second = std::min(min_second, g[j - 1] - 2 * g[j] + g[j + 1]);
  tally.record(min_second >= -hk * hk, "second difference " + fmt(min_second) + " below -" + fmt(hk * hk));
  res.passed = tally.passed();
  res.observed = {worst_identity, worst_argmin, min_second};
  res.bound_or_target = {res.tolerance, 1.0, -hk * hk};
  res.details = "max |min_y{...} - t S_eps|, max argmin offset from u_PM in y cells, min second difference of "
                "K*(y) - y^2/2; t=" + fmt(t) + " eps=" + fmt(eps) + "; " + tally.summary();
  return res;
}

// ---------------------------------------------------------------- imaging

StaircasingOutcome run_staircasing(const Image& clean, const StaircasingSetup& setup) {
  if (clean.width * clean.height > 64 * 64) throw InvalidArgument("check_staircasing: image larger than 64x64");
  StaircasingOutcome out;
  CheckResult& res = out.check;
  res.name = "staircasing";
  res.tolerance = 5.0;
  if (setup.lambda <= 1e-6) {
    res.passed = true;
    res.details = "skipped: lambda ~ 0 leaves both estimates equal to the data";
    return out;
  }
  out.noisy = add_gaussian_noise(clean, NoiseSpec{setup.sigma, setup.noise_seed});
  const RofResult map = rof_map(out.noisy, setup.t, setup.lambda);
  if (!map.converged) throw ConvergenceError("check_staircasing: MAP solver did not converge", map.residual);
  out.map = map.image;
  const McmcResult pm = posterior_mean_mcmc(out.noisy, setup.t, setup.eps, setup.lambda, setup.sampler);
  out.pm = pm.mean_image;
  const double pf_map = plateau_fraction(out.map, 1e-6);
  const double pf_pm = plateau_fraction(out.pm, 1e-6);
  const double pf_map_coarse = plateau_fraction(out.map, 0.5);
  const double pf_pm_coarse = plateau_fraction(out.pm, 0.5);
  res.passed = pf_map > res.tolerance * pf_pm;
  res.observed = {pf_map, pf_pm, pf_map_coarse, pf_pm_coarse, psnr(clean, out.noisy), psnr(clean, out.map),
                  psnr(clean, out.pm), pm.rhat_max};
  res.bound_or_target = {res.tolerance * pf_pm};
  res.details =
      "observed: plateau fraction of MAP and PM at tolerance 1e-6, then at 0.5, PSNR of noisy/MAP/PM against the "
      "clean image, max split R-hat; requires MAP fraction > 5 x PM fraction at 1e-6";
  return out;
}

CheckResult check_staircasing(const Image& clean, const StaircasingSetup& setup) {
  return run_staircasing(clean, setup).check;
}

// ---------------------------------------------------------------- PDE residuals

namespace {

template <class Residual, class Accept>
CheckResult order_study(std::string name, const Prior& prior, int points, Rng& rng, const OrderStudy& study,
                        Residual residual, Accept accept) {
  CheckResult res = named(std::move(name));
  res.tolerance = study.min_order;
  const std::size_t n = prior.dim();
  Tally tally;
  double min_order = kInf, max_fine = 0.0;
  int floored = 0;
  for (int k = 0; k < points; ++k) {
    Vec x;
    double t = 0.0;
    do {
      x = draw_x(n, rng, study.x_max);
      t = rng.uniform(study.t_lo, study.t_hi);
    } while (!accept(x, t));
    Vec r;
    for (double h : study.steps) r.push_back(residual(x, t, h));
    max_fine = std::max(max_fine, r.back());
    if (*std::max_element(r.begin(), r.end()) <= study.floor) {
      ++floored;
      tally.record(true, "");
      continue;
    }
    const double order = observed_order(r);
    min_order = std::min(min_order, order);
    tally.record(order >= study.min_order, "x=" + fmt(x) + " t=" + fmt(t) + " residuals " + fmt(r) +
                                               " order " + fmt(order));
  }
  res.passed = tally.passed();
  res.observed = {min_order, max_fine};
  res.bound_or_target = {study.min_order};
  res.details = "min observed order over points above the roundoff floor " + fmt(study.floor) + " (" +
                std::to_string(floored) + " points at the floor), and the max residual at the finest step; steps " +
                fmt(study.steps) + "; " + tally.summary();
  return res;
}

}  // namespace

CheckResult check_viscous_order(const Prior& prior, int points, Rng& rng, const OrderStudy& study) {
  return order_study(
      "viscous_residual_order[" + prior.name() + "]", prior, points, rng, study,
      [&](const Vec& x, double t, double h) {
        return viscous_residual(prior, x, EstimatorParams{t, study.eps}, h, Method::Quadrature);
      },
      [](const Vec&, double) { return true; });
}

CheckResult check_heat_order(const Prior& prior, int points, Rng& rng, const OrderStudy& study) {
  return order_study(
      "heat_residual_order[" + prior.name() + "]", prior, points, rng, study,
      [&](const Vec& x, double t, double h) {
        return heat_residual(prior, x, EstimatorParams{t, study.eps}, h, Method::Quadrature);
      },
      [](const Vec&, double) { return true; });
}

CheckResult check_first_order_order(const Prior& prior, int points, Rng& rng, const OrderStudy& study) {
  const double h_max = *std::max_element(study.steps.begin(), study.steps.end());
  return order_study(
      "first_order_residual_order[" + prior.name() + "]", prior, points, rng, study,
      [&](const Vec& x, double t, double h) { return first_order_residual(prior, x, t, h, h); },
      [&](const Vec& x, double t) {
        if (const auto* l = std::get_if<Prior::WeightedL1>(&prior.kind())) {
          for (std::size_t i = 0; i < x.size(); ++i) {
            // kink of S_0 where |x_i| = t lambda_i, seen by both the x and the t stencil
            if (std::abs(std::abs(x[i]) - t * l->lambda[i]) <= 10.0 * h_max * (1.0 + l->lambda[i])) return false;
          }
        }
        if (const auto* b = std::get_if<Prior::BallIndicator>(&prior.kind()))
          return std::abs(norm(x) - b->radius) > 10.0 * h_max;
        return true;
      });
}

// ---------------------------------------------------------------- shape of S_eps

CheckResult check_joint_convexity(const Prior& prior, int trials, Rng& rng, const TrialRanges& ranges) {
  const std::size_t n = prior.dim();
  CheckResult res = named("joint_convexity[" + prior.name() + "]");
  res.tolerance = kSlack;
  Tally tally;
  double worst = -kInf;
  for (int k = 0; k < trials; ++k) {
    const double eps = rng.log_uniform(ranges.eps_lo, ranges.eps_hi);
    const Vec x1 = draw_x(n, rng, ranges.x_max), x2 = draw_x(n, rng, ranges.x_max);
    const double t1 = rng.log_uniform(ranges.t_lo, ranges.t_hi), t2 = rng.log_uniform(ranges.t_lo, ranges.t_hi);
    Vec xm(n);
    for (std::size_t i = 0; i < n; ++i) xm[i] = 0.5 * (x1[i] + x2[i]);
    const double tm = 0.5 * (t1 + t2);
    auto f = [&](const Vec& x, double t) {
      return estimate_for_check(prior, x, EstimatorParams{t, eps}).s_eps - 0.5 * n * eps * std::log(t);
    };
    const double f1 = f(x1, t1), f2 = f(x2, t2), fm = f(xm, tm);
    const double gap = fm - 0.5 * (f1 + f2);
    const double scale = std::max({1.0, std::abs(f1), std::abs(f2)});
    worst = std::max(worst, gap / scale);
    tally.record(gap <= kSlack * scale, "eps=" + fmt(eps) + " (" + fmt(x1) + ", " + fmt(t1) + ") (" + fmt(x2) + ", " +
                                            fmt(t2) + ") midpoint excess " + fmt(gap));
  }
  res.passed = tally.passed();
  res.observed = {worst};
  res.bound_or_target = {0.0};
  res.details = "max scaled midpoint excess of S_eps - (n eps/2) ln t; " + tally.summary();
  return res;
}

namespace {

// Strict decrease of f along an increasing parameter grid.
template <class F>
CheckResult strictly_decreasing(std::string name, std::string what, int trials, const Vec& grid, F make) {
  CheckResult res = named(std::move(name));
  Tally tally;
  double worst = -kInf;
  for (int k = 0; k < trials; ++k) {
    auto [f, label] = make();
    double prev = f(grid[0]);
    for (std::size_t j = 1; j < grid.size(); ++j) {
      const double cur = f(grid[j]);
      worst = std::max(worst, cur - prev);
      tally.record(cur < prev, label + ": value " + fmt(cur) + " at " + fmt(grid[j]) + " not below " + fmt(prev));
      prev = cur;
    }
  }
  res.passed = tally.passed();
  res.observed = {worst};
  res.bound_or_target = {0.0};
  res.details = "max increment of " + what + " between consecutive grid points (must be negative); " + tally.summary();
  return res;
}

Vec log_grid(double lo, double hi, int count) {
  Vec g(count);
  for (int i = 0; i < count; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  return g;
}

}  // namespace

CheckResult check_time_monotone(const Prior& prior, int trials, Rng& rng, const TrialRanges& ranges) {
  const std::size_t n = prior.dim();
  return strictly_decreasing("time_monotone[" + prior.name() + "]", "S_eps - (n eps/2) ln t", trials,
                             log_grid(ranges.t_lo, ranges.t_hi, 20), [&] {
                               const Vec x = draw_x(n, rng, ranges.x_max);
                               const double eps = rng.log_uniform(ranges.eps_lo, ranges.eps_hi);
                               auto f = [&prior, x, eps, n](double t) {
                                 return estimate_for_check(prior, x, EstimatorParams{t, eps}).s_eps -
                                        0.5 * n * eps * std::log(t);
                               };
                               return std::pair{f, "x=" + fmt(x) + " eps=" + fmt(eps)};
                             });
}

CheckResult check_viscosity_monotone(const Prior& prior, int trials, Rng& rng, const TrialRanges& ranges) {
  const std::size_t n = prior.dim();
  return strictly_decreasing("viscosity_monotone[" + prior.name() + "]", "S_eps/eps - (n/2) ln eps", trials,
                             log_grid(ranges.eps_lo, ranges.eps_hi, 20), [&] {
                               const Vec x = draw_x(n, rng, ranges.x_max);
                               const double t = rng.log_uniform(ranges.t_lo, ranges.t_hi);
                               auto f = [&prior, x, t, n](double eps) {
                                 return estimate_for_check(prior, x, EstimatorParams{t, eps}).s_eps / eps -
                                        0.5 * n * std::log(eps);
                               };
                               return std::pair{f, "x=" + fmt(x) + " t=" + fmt(t)};
                             });
}

CheckResult check_k_eps_convex(const Prior& prior, int trials, Rng& rng, const TrialRanges& ranges) {
  const std::size_t n = prior.dim();
  CheckResult res = named("k_eps_convex[" + prior.name() + "]");
  Tally tally;
  double min_second = kInf;
  for (int k = 0; k < trials; ++k) {
    const Vec x0 = draw_x(n, rng, ranges.x_max);
    Vec v(n);
    for (double& c : v) c = rng.normal();
    v = scaled(v, 1.0 / norm(v));
    const EstimatorParams p = draw_params(rng, ranges);
    Vec ks;
    for (int j = -30; j <= 30; ++j) {
      Vec x = x0;
      for (std::size_t i = 0; i < n; ++i) x[i] += 0.1 * j * v[i];
      ks.push_back(0.5 * norm_sq(x) - p.t * estimate_for_check(prior, x, p).s_eps);
    }
    for (std::size_t j = 1; j + 1 < ks.size(); ++j) {
      const double d2 = ks[j - 1] - 2 * ks[j] + ks[j + 1];
      min_second = std::min(min_second, d2);
      tally.record(d2 > 0.0, point(x0, p) + " direction " + fmt(v) + " second difference " + fmt(d2));
    }
  }
  res.passed = tally.passed();
  res.observed = {min_second};
  res.bound_or_target = {0.0};
  res.details = "min second difference of |x|^2/2 - t S_eps along random lines (step 0.1), must be positive; " +
                tally.summary();
  return res;
}

// ---------------------------------------------------------------- limits

CheckResult check_small_t_limit(const Prior& prior, std::span<const double> x, double eps,
                                std::span<const double> t_seq) {
  require_dim(x.size(), prior.dim(), "check_small_t_limit");
  if (prior.domain_contains(x) != DomainLocation::Interior)
    throw InvalidArgument("check_small_t_limit: x must be interior to dom J");
  CheckResult res = named("small_t_limit[" + prior.name() + "]");
  const double j = prior.eval(x);
  const double w_limit = std::exp(-j / eps);
  for (double t : t_seq) {
    const PosteriorSummary s = estimate_for_check(prior, x, EstimatorParams{t, eps});
    res.observed.push_back(std::abs(s.w_eps - w_limit));
  }
  res.tolerance = 1e-3 * w_limit;
  res.bound_or_target = {w_limit};
  res.passed = res.observed.back() <= res.tolerance;
  res.details = "|w_eps(x, t_k) - exp(-J(x)/eps)| along t_k = " + fmt(t_seq) + "; x=" + fmt(x) + " eps=" + fmt(eps) +
                "; the last gap must be below 1e-3 exp(-J/eps)";
  return res;
}

CheckResult check_smoothing_limit(const Prior& prior, std::span<const double> x, const EstimatorParams& params,
                                  std::span<const double> mu_seq) {
  CheckResult res = named("smoothing_limit[" + prior.name() + "]");
  const Vec exact = estimate(prior, x, params, Method::Quadrature).u_pm;
  const std::vector<Vec> seq = pm_via_moreau_smoothing(prior, x, params, mu_seq);
  Tally tally;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const double e = std::sqrt(dist_sq(seq[k], exact));
    if (k > 0) tally.record(e <= res.observed.back() + kSlack, "error grew at mu=" + fmt(mu_seq[k]));
    res.observed.push_back(e);
  }
  // mass leaks past a kink or a wall over a distance ~ sqrt(mu eps), so the error should
  // fall roughly like sqrt(mu); demand an observed rate of at least 0.4
  const double rate = std::log(res.observed.front() / res.observed.back()) / std::log(mu_seq.front() / mu_seq.back());
  res.tolerance = 0.4;
  tally.record(seq.size() < 2 || rate >= res.tolerance, "observed rate " + fmt(rate) + " below 0.4");
  res.passed = tally.passed();
  res.bound_or_target = exact;
  res.observed.push_back(rate);
  res.details = "|u_PM(smoothed, mu_k) - u_PM| for mu_k = " + fmt(mu_seq) +
                ", then the observed rate in mu; errors must not grow; " + tally.summary();
  return res;
}

CheckResult check_hopf_lax(const Prior& prior, const Grid1D& grid, std::span<const double> xs, double t) {
  CheckResult res = named("hopf_lax[" + prior.name() + "]");
  const double h = grid.spacing();
  res.tolerance = 10.0 * h * h;
  Tally tally;
  double worst = 0.0;
  for (double x : xs) {
    const HopfCheck hc = hopf_check_1d(prior, grid, x, t);
    const double d = std::abs(hc.lax - hc.hopf);
    worst = std::max(worst, d);
    tally.record(d <= res.tolerance, "x=" + fmt(x) + " lax=" + fmt(hc.lax) + " hopf=" + fmt(hc.hopf));
  }
  res.passed = tally.passed();
  res.observed = {worst};
  res.bound_or_target = {0.0};
  res.details = "max |Lax-Oleinik - Hopf| on a grid of spacing " + fmt(h) + ", t=" + fmt(t) + "; " + tally.summary();
  return res;
}

CheckResult check_grad_s0_limit(const Prior& prior, std::span<const double> y, std::span<const double> t_seq) {
  CheckResult res = named("grad_s0_limit[" + prior.name() + "]");
  const Vec pi = prior.min_subgradient(y);
  for (const Vec& g : grad_s0_limit_check(prior, y, t_seq)) res.observed.push_back(std::sqrt(dist_sq(g, pi)));
  res.tolerance = 1e-6 * (1.0 + norm(pi));
  res.bound_or_target = pi;
  res.passed = res.observed.back() <= res.tolerance;
  res.details = "|grad_x S_0(y, t_k) - pi(y)| along t_k = " + fmt(t_seq) + " at y=" + fmt(y);
  return res;
}

// ---------------------------------------------------------------- suites

Suite suite_from_string(const std::string& name) {
  if (name == "core") return Suite::Core;
  if (name == "bounds") return Suite::Bounds;
  if (name == "pde") return Suite::Pde;
  if (name == "imaging") return Suite::Imaging;
  throw InvalidArgument("unknown suite '" + name + "' (expected core, bounds, pde or imaging)");
}

const char* to_string(Suite suite) {
  switch (suite) {
    case Suite::Core: return "core";
    case Suite::Bounds: return "bounds";
    case Suite::Pde: return "pde";
    case Suite::Imaging: return "imaging";
  }
  return "?";
}

namespace {

using CheckFn = std::function<CheckResult(Rng&)>;

std::vector<CheckFn> core_checks() {
  static const Prior zero = Prior::zero(1), quad = Prior::quadratic(1.0, 1), l1 = Prior::weighted_l1({2.0});
  static const Prior quad2 = Prior::quadratic(0.5, 2), l1_2 = Prior::weighted_l1({2.0, 0.5});
  static const Prior ball1 = Prior::ball(1.0, 1), ball2 = Prior::ball(1.0, 2);
  std::vector<CheckFn> fns;
  for (const Prior* p : {&zero, &quad, &l1, &quad2, &l1_2, &ball2}) {
    fns.push_back([p](Rng& r) { return check_mse_bound(*p, 40, r); });
    fns.push_back([p](Rng& r) { return check_map_pm_distance(*p, 40, r); });
    fns.push_back([p](Rng& r) { return check_nonexpansive_monotone(*p, 40, r); });
  }
  for (const Prior* p : {&zero, &quad, &l1, &ball1})
    fns.push_back([p](Rng& r) { return check_t_to_zero_trials(*p, 10, r); });
  fns.push_back([](Rng&) {
    const Vec x{0.3};
    const Vec ts{1.0, 0.1, 0.01, 1e-3, 1e-4, 1e-5, 1e-6};
    return check_t_to_zero(l1, x, 0.5, ts, std::vector<Vec>(ts.size(), Vec{1.0}));
  });
  // Fig. 2 regime of the l1 example
  for (const Prior* p : {&zero, &quad, &l1}) {
    fns.push_back([p](Rng&) {
      std::vector<Vec> xs;
      for (int i = 0; i <= 100; ++i) xs.push_back({-5.0 + 0.1 * i});
      const Vec ts{0.5, 1.0, 1.25, 2.0, 4.0};
      const Vec eps{1.0, 0.5, 0.25, 0.1, 0.025};
      return check_eps_to_zero(*p, xs, ts, eps);
    });
  }
  fns.push_back([](Rng& r) { return check_topology(ball2, 40, r); });
  fns.push_back([](Rng& r) { return check_topology(ball1, 40, r); });
  fns.push_back([](Rng& r) { return check_topology(l1, 20, r, 10.0); });
  for (const Prior* p : {&zero, &quad, &l1, &l1_2})
    fns.push_back([p](Rng& r) { return check_representation(*p, 10, r); });
  for (const Prior* p : {&zero, &quad, &l1, &ball1, &ball2})
    fns.push_back([p](Rng& r) { return check_monotonicity_inequality(*p, 20, r); });
  fns.push_back([](Rng&) { return check_bregman_risk_1d(quad, 3.0, 1.0, 1.0, Grid1D::uniform(-1.0, 4.0, 5001)); });
  fns.push_back([](Rng&) { return check_bregman_risk_1d(zero, 3.0, 1.0, 1.0, Grid1D::uniform(-1.0, 4.0, 5001)); });
  fns.push_back([](Rng&) { return check_bregman_risk_1d(l1, 5.0, 1.25, 0.5, Grid1D::uniform(-1.0, 6.0, 7001)); });
  fns.push_back([](Rng&) { return check_bregman_risk_1d(l1, 1.0, 1.25, 0.5, Grid1D::uniform(-1.0, 2.0, 3001)); });
  fns.push_back([](Rng&) { return check_moreau_decomposition_1d(zero, Grid1D::uniform(-5, 5, 101), 1.0, 1.0); });
  fns.push_back([](Rng&) { return check_moreau_decomposition_1d(quad, Grid1D::uniform(-5, 5, 101), 1.0, 1.0); });
  fns.push_back([](Rng&) { return check_moreau_decomposition_1d(l1, Grid1D::uniform(-5, 5, 101), 1.25, 0.5); });
  for (const Prior* p : {&quad, &l1, &quad2, &l1_2, &ball2}) {
    fns.push_back([p](Rng& r) { return check_joint_convexity(*p, 20, r); });
    fns.push_back([p](Rng& r) { return check_time_monotone(*p, 3, r); });
    fns.push_back([p](Rng& r) { return check_viscosity_monotone(*p, 3, r); });
    fns.push_back([p](Rng& r) { return check_k_eps_convex(*p, 2, r); });
  }
  const Vec small_t{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
  fns.push_back([small_t](Rng&) { return check_small_t_limit(quad, Vec{1.5}, 0.5, small_t); });
  fns.push_back([small_t](Rng&) { return check_small_t_limit(l1, Vec{0.7}, 0.5, small_t); });
  fns.push_back([small_t](Rng&) { return check_small_t_limit(l1, Vec{0.0}, 1.0, small_t); });
  fns.push_back([small_t](Rng&) { return check_small_t_limit(ball2, Vec{0.2, -0.3}, 1.0, small_t); });
  fns.push_back([](Rng&) {
    return check_smoothing_limit(ball1, Vec{3.0}, EstimatorParams{1.0, 1.0}, Vec{0.5, 0.1, 0.02, 0.004});
  });
  fns.push_back([](Rng&) {
    return check_smoothing_limit(l1, Vec{1.0}, EstimatorParams{1.25, 0.5}, Vec{0.5, 0.1, 0.02, 0.004});
  });
  fns.push_back([](Rng&) {
    return check_hopf_lax(quad, Grid1D::uniform(-10.0, 10.0, 2001), Vec{-2.0, -0.5, 0.0, 1.0, 3.0}, 1.0);
  });
  const Vec t_down{1.0, 0.1, 1e-2, 1e-4, 1e-6, 1e-8};
  fns.push_back([t_down](Rng&) { return check_grad_s0_limit(quad2, Vec{1.0, -2.0}, t_down); });
  fns.push_back([t_down](Rng&) { return check_grad_s0_limit(l1_2, Vec{0.0, 0.3}, t_down); });
  fns.push_back([t_down](Rng&) { return check_grad_s0_limit(ball2, Vec{0.6, 0.8}, t_down); });
  return fns;
}

std::vector<CheckFn> bounds_checks() {
  static const Prior zero = Prior::zero(1), quad = Prior::quadratic(1.0, 1), l1 = Prior::weighted_l1({2.0});
  static const Prior ball2 = Prior::ball(1.0, 2);
  std::vector<CheckFn> fns;
  for (const Prior* p : {&zero, &quad, &l1}) {
    fns.push_back([p](Rng& r) { return check_mse_bound(*p, 500, r); });
    fns.push_back([p](Rng& r) { return check_map_pm_distance(*p, 500, r); });
    fns.push_back([p](Rng& r) { return check_nonexpansive_monotone(*p, 500, r); });
    fns.push_back([p](Rng& r) { return check_t_to_zero_trials(*p, 500, r); });
  }
  fns.push_back([](Rng& r) { return check_topology(ball2, 200, r); });
  return fns;
}

std::vector<CheckFn> pde_checks() {
  static const Prior quad = Prior::quadratic(1.0, 1), l1 = Prior::weighted_l1({2.0});
  static const Prior quad2 = Prior::quadratic(0.5, 2), l1_2 = Prior::weighted_l1({2.0, 0.5});
  std::vector<CheckFn> fns;
  for (const Prior* p : {&quad, &l1, &quad2, &l1_2}) {
    fns.push_back([p](Rng& r) { return check_viscous_order(*p, 50, r); });
    fns.push_back([p](Rng& r) { return check_heat_order(*p, 50, r); });
    fns.push_back([p](Rng& r) { return check_first_order_order(*p, 50, r); });
  }
  return fns;
}

}  // namespace

VerificationReport run_suite(Suite suite, std::uint64_t seed, const SuiteOptions& options) {
  VerificationReport report;
  report.seed = seed;
  report.timestamp = iso8601_timestamp();
  std::vector<CheckFn> fns;
  switch (suite) {
    case Suite::Core: fns = core_checks(); break;
    case Suite::Bounds: fns = bounds_checks(); break;
    case Suite::Pde: fns = pde_checks(); break;
    case Suite::Imaging: {
      const SuiteOptions opts = options;
      fns.push_back([opts, seed](Rng&) {
        const std::size_t s = static_cast<std::size_t>(opts.imaging_size);
        StaircasingSetup setup;
        setup.noise_seed = derive_seed(seed, 1000);
        setup.sampler = opts.sampler;
        setup.sampler.seed = derive_seed(seed, 1001);
        return check_staircasing(make_test_pattern(s, s), setup);
      });
      break;
    }
  }
  report.checks.resize(fns.size());
  for (std::size_t k = 0; k < fns.size(); ++k) {
    Rng rng(derive_seed(seed, k));
    try {
      report.checks[k] = fns[k](rng);
    } catch (const NumericalError& e) {
      report.checks[k] = named("check_" + std::to_string(k));
      report.checks[k].details = std::string("numerical failure: ") + e.what();
    }
  }
  return report;
}

}  // namespace hjbd
