// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Every random draw is seeded, so a rerun reproduces the same verdicts.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "hjbd/gibbs_sampler.hpp"
#include "hjbd/priors.hpp"
#include "hjbd/quadrature.hpp"
#include "hjbd/random.hpp"
#include "hjbd/special.hpp"
#include "hjbd/tv_imaging.hpp"
#include "hjbd/verification.hpp"
#include "hjbd/viscous_hj.hpp"

using namespace hjbd;

namespace {

struct Verdict {
  bool passed = true;
  std::string note;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (passed) note = what;
    passed = false;
  }
  void absorb(const CheckResult& c) {
    require(c.passed, c.name + ": " + c.details);
  }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// ---------------------------------------------------------------- 1

Verdict tikhonov() {
  Verdict v;
  Rng rng(101);
  double worst_s = 0, worst_u = 0, worst_mse = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 1 + k % 3;
    const double m = rng.log_uniform(0.01, 10.0);
    Vec x(n);
    for (double& c : x) c = rng.uniform(-10.0, 10.0);
    const EstimatorParams p{rng.log_uniform(0.05, 50.0), rng.log_uniform(0.01, 50.0)};
    const PosteriorSummary q = posterior_summary_quadrature(Prior::quadratic(m, n), x, p);
    const double a = 1.0 + m * p.t;
    const double s = m * norm_sq(x) / (2 * a) + 0.5 * n * p.eps * std::log(a);
    const Vec u = scaled(x, 1.0 / a);
    const double mse = n * p.t * p.eps / a;
    worst_s = std::max(worst_s, rel(q.s_eps, s));
    worst_u = std::max(worst_u, std::sqrt(dist_sq(q.u_pm, u)) / norm(u));
    worst_mse = std::max(worst_mse, rel(q.mse, mse));
  }
  v.require(worst_s <= 1e-6 && worst_u <= 1e-6 && worst_mse <= 1e-6, "relative error above 1e-6");
  v.note += (v.note.empty() ? "" : "; ") + std::string("max rel err S ") + num(worst_s) + ", u " + num(worst_u) +
            ", MSE " + num(worst_mse);
  return v;
}

// ---------------------------------------------------------------- 2

Verdict soft_thresholding() {
  Verdict v;
  const double t = 1.25, lambda = 2.0, tl = t * lambda;
  const Prior prior = Prior::weighted_l1({lambda});
  const double lam[1] = {lambda};
  double worst = 0;
  Vec gap_to_soft, gap_to_identity;
  for (double eps : {0.025, 0.1, 0.25, 0.5, 1.0}) {
    const EstimatorParams p{t, eps};
    double prev = -1e300, to_soft = 0, to_id = 0;
    for (int i = 0; i <= 2000; ++i) {
      const double x = -100.0 + 0.1 * i;
      const double xv[1] = {x};
      const double closed = u_pm_closed_l1(lam, xv, p).u_pm[0];
      const double quad = posterior_summary_quadrature(prior, xv, p).u_pm[0];
      worst = std::max(worst, std::abs(closed - quad));
      v.require(closed > prev, "u_PM not increasing at x=" + num(x) + " eps=" + num(eps));
      prev = closed;
      // between the soft threshold and the identity
      const double soft = special::soft_threshold(x, tl);
      v.require(std::min(soft, x) - 1e-12 <= closed && closed <= std::max(soft, x) + 1e-12,
                "u_PM outside [T(x), x] at x=" + num(x));
      if (std::abs(x) <= 5.0) {
        to_soft = std::max(to_soft, std::abs(closed - soft));
        to_id = std::max(to_id, std::abs(closed - x));
      }
    }
    gap_to_soft.push_back(to_soft);
    gap_to_identity.push_back(to_id);
  }
  v.require(worst <= 1e-8, "closed form vs quadrature " + num(worst));
  // larger eps: farther from the soft threshold, closer to the identity
  for (std::size_t k = 1; k < gap_to_soft.size(); ++k) {
    v.require(gap_to_soft[k] > gap_to_soft[k - 1], "sup |u - T| not increasing in eps");
    v.require(gap_to_identity[k] < gap_to_identity[k - 1], "sup |u - x| not decreasing in eps");
  }
  v.note += (v.note.empty() ? "" : "; ") + std::string("max |closed - quadrature| ") + num(worst) +
            ", sup|u-T| on [-5,5] from " + num(gap_to_soft.front()) + " to " + num(gap_to_soft.back());
  return v;
}

// ---------------------------------------------------------------- 3

Verdict viscous_pde() {
  Verdict v;
  Rng rng(303);
  OrderStudy study;  // h in {1e-2, 5e-3, 2.5e-3}, t in [0.5, 5], eps = 1
  for (const Prior& p : {Prior::quadratic(1.0, 1), Prior::weighted_l1({2.0})}) {
    const CheckResult c = check_viscous_order(p, 50, rng, study);
    v.absorb(c);
    v.note += (v.note.empty() ? "" : "; ") + p.name() + " min order " + num(c.observed[0]);
  }
  return v;
}

// ---------------------------------------------------------------- 4

Verdict bounds() {
  Verdict v;
  Rng rng(404);
  for (const Prior& p : {Prior::zero(1), Prior::quadratic(1.0, 1), Prior::weighted_l1({2.0})}) {
    v.absorb(check_mse_bound(p, 500, rng));
    v.absorb(check_map_pm_distance(p, 500, rng));
    v.absorb(check_nonexpansive_monotone(p, 500, rng));
    v.absorb(check_t_to_zero_trials(p, 500, rng));
  }
  // the Quadratic equality case is part of check_mse_bound at relative 1e-9
  if (v.passed) v.note = "4 checks x 3 priors x 500 trials";
  return v;
}

// ---------------------------------------------------------------- 5

Verdict eps_limit() {
  Verdict v;
  std::vector<Vec> xs;
  for (int i = 0; i <= 100; ++i) xs.push_back({-5.0 + 0.1 * i});
  const Vec ts{0.5, 1.0, 1.25, 2.0, 4.0};
  const Vec eps{1.0, 0.3, 0.1, 0.03, 0.01};
  for (const Prior& p : {Prior::weighted_l1({2.0}), Prior::quadratic(1.0, 1), Prior::zero(1)}) {
    const CheckResult c = check_eps_to_zero(p, xs, ts, eps);
    v.absorb(c);
    if (p.is<Prior::WeightedL1>())
      v.note += "l1 sup|u_PM - u_MAP| " + num(c.observed[5]) + " -> " + num(c.observed[9]);
  }
  return v;
}

// ---------------------------------------------------------------- 6

Verdict moreau() {
  Verdict v;
  const Grid1D xs = Grid1D::uniform(-5.0, 5.0, 201);
  const CheckResult q = check_moreau_decomposition_1d(Prior::quadratic(1.0, 1), xs, 1.0, 1.0);
  const CheckResult l = check_moreau_decomposition_1d(Prior::weighted_l1({2.0}), xs, 1.25, 0.5);
  v.absorb(q);
  v.absorb(l);
  v.note += (v.note.empty() ? "" : "; ") + std::string("identity error Quadratic ") + num(q.observed[0]) +
            ", WeightedL1 " + num(l.observed[0]);
  return v;
}

// ---------------------------------------------------------------- 7

Verdict topology() {
  Verdict v;
  Rng rng(707);
  const CheckResult c2 = check_topology(Prior::ball(1.0, 2), 200, rng, 50.0);
  const CheckResult c1 = check_topology(Prior::ball(1.0, 1), 200, rng, 50.0);
  v.absorb(c2);
  v.absorb(c1);
  v.note += (v.note.empty() ? "" : "; ") + std::string("max |u_PM| ") + num(std::max(c1.observed[0], c2.observed[0]));
  return v;
}

// ---------------------------------------------------------------- 8

Verdict bregman() {
  Verdict v;
  Rng rng(808);
  for (const Prior& p : {Prior::quadratic(1.0, 1), Prior::weighted_l1({2.0})}) {
    for (int k = 0; k < 20; ++k) {
      const double x = rng.uniform(-10.0, 10.0);
      const double t = rng.log_uniform(0.05, 50.0), eps = rng.log_uniform(0.01, 50.0);
      const double lo = std::min(0.0, x) - 1.0, hi = std::max(0.0, x) + 1.0;
      const auto count = static_cast<std::size_t>(std::llround((hi - lo) / 1e-3)) + 1;
      v.absorb(check_bregman_risk_1d(p, x, t, eps, Grid1D::uniform(lo, lo + 1e-3 * (count - 1), count)));
    }
  }
  if (v.passed) v.note = "40 risk curves, argmin within one 1e-3 cell of u_MAP";
  return v;
}

// ---------------------------------------------------------------- 9

struct SamplerCase {
  Image x;
  double t, eps, lambda;
};

std::vector<SamplerCase> sampler_cases() {
  std::vector<SamplerCase> cases{{Image(2, 1, {100.0, 120.0}), 20.0, 20.0, 1.0}};
  Rng rng(909);
  for (int k = 0; k < 9; ++k) {
    const double a = rng.uniform(50.0, 200.0), b = rng.uniform(50.0, 200.0);
    // alternate horizontal and vertical pairs
    Image x = k % 2 ? Image(1, 2, {a, b}) : Image(2, 1, {a, b});
    cases.push_back({x, rng.log_uniform(1.0, 50.0), rng.log_uniform(1.0, 50.0), rng.log_uniform(0.2, 5.0)});
  }
  return cases;
}

struct SamplerRun {
  Verdict verdict;
  std::vector<Image> means;
};

SamplerRun sampler_correctness() {
  SamplerRun run;
  Verdict& v = run.verdict;
  double worst_z = 0, worst_rhat = 0;
  int idx = 0;
  for (const SamplerCase& c : sampler_cases()) {
    SamplerConfig cfg;
    cfg.seed = 9000 + 10 * idx++;
    const McmcResult r = posterior_mean_mcmc(c.x, c.t, c.eps, c.lambda, cfg);
    run.means.push_back(r.mean_image);
    const Prior tv = Prior::anisotropic_tv(c.lambda, c.x.width, c.x.height);
    const PosteriorSummary q = posterior_summary_quadrature(tv, c.x.pixels, EstimatorParams{c.t, c.eps});
    for (std::size_t i = 0; i < 2; ++i) {
      const double z = std::abs(r.mean_image.pixels[i] - q.u_pm[i]) / r.stderr_image.pixels[i];
      worst_z = std::max(worst_z, z);
      v.require(z <= 3.0, "case " + std::to_string(idx - 1) + " pixel " + std::to_string(i) + ": mcmc " +
                              num(r.mean_image.pixels[i]) + " quadrature " + num(q.u_pm[i]) + " z=" + num(z));
    }
    worst_rhat = std::max(worst_rhat, r.rhat_max);
    v.require(r.rhat_max <= 1.05, "R-hat " + num(r.rhat_max));
  }
  v.note += (v.note.empty() ? "" : "; ") + std::string("max |z| ") + num(worst_z) + ", max R-hat " + num(worst_rhat);
  return run;
}

// ---------------------------------------------------------------- 10

StaircasingOutcome staircasing_run() {
  StaircasingSetup setup;  // sigma 20, t 20, eps 20, lambda 1, 20 000 sweeps
  setup.noise_seed = 1010;
  setup.sampler.seed = 1011;
  return run_staircasing(make_test_pattern(64, 64), setup);
}

Verdict staircasing(const StaircasingOutcome& out) {
  Verdict v;
  v.absorb(out.check);
  const Vec& o = out.check.observed;
  v.note += (v.note.empty() ? "" : "; ") + std::string("plateau fraction MAP ") + num(o[0]) + ", PM " + num(o[1]) +
            " (at tol 0.5: MAP " + num(o[2]) + ", PM " + num(o[3]) + "); PSNR noisy " + num(o[4]) + ", MAP " +
            num(o[5]) + ", PM " + num(o[6]);
  return v;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* title, double limit_s, const std::function<Verdict()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = body();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.require(secs < limit_s, "runtime " + num(secs) + " s over the " + num(limit_s) + " s limit");
    failures += !v.passed;
    std::printf("[%s] criterion %2d  %-32s %8.2f s  %s\n", v.passed ? "PASS" : "FAIL", id, title, secs, v.note.c_str());
    std::fflush(stdout);
  };

  report(1, "Tikhonov closed forms", 10, tikhonov);
  report(2, "soft-thresholding example", 10, soft_thresholding);
  report(3, "viscous HJ residual order", 60, viscous_pde);
  report(4, "bounds and limits", 60, bounds);
  report(5, "vanishing viscosity limit", 30, eps_limit);
  report(6, "Moreau decomposition", 60, moreau);
  report(7, "topology of the ball prior", 20, topology);
  report(8, "Bregman Bayes estimator", 60, bregman);

  SamplerRun first_sampler;
  report(9, "Gibbs sampler vs quadrature", 120, [&] {
    first_sampler = sampler_correctness();
    return first_sampler.verdict;
  });
  StaircasingOutcome first_stairs;
  report(10, "staircasing", 600, [&] {
    first_stairs = staircasing_run();
    return staircasing(first_stairs);
  });
  report(11, "determinism", 900, [&] {
    Verdict v;
    // rerun with a different worker count: results must not depend on the schedule
    setenv("HJBD_THREADS", "3", 1);
    const SamplerRun again = sampler_correctness();
    const StaircasingOutcome stairs = staircasing_run();
    unsetenv("HJBD_THREADS");
    v.require(again.means == first_sampler.means, "sampler means differ between runs");
    v.require(again.verdict.note == first_sampler.verdict.note, "sampler report differs between runs");
    v.require(stairs.pm == first_stairs.pm && stairs.map == first_stairs.map && stairs.noisy == first_stairs.noisy,
              "staircasing images differ between runs");
    v.require(to_json(stairs.check) == to_json(first_stairs.check), "staircasing report differs between runs");
    if (v.passed) v.note = "criteria 9 and 10 rerun bit-identically";
    return v;
  });

  std::printf("%d of 11 criteria failed\n", failures);
  return failures ? 1 : 0;
}
