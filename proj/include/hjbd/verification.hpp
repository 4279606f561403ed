#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hjbd/first_order_hj.hpp"
#include "hjbd/gibbs_sampler.hpp"
#include "hjbd/linalg.hpp"
#include "hjbd/priors.hpp"
#include "hjbd/random.hpp"
#include "hjbd/tv_imaging.hpp"
#include "hjbd/viscous_hj.hpp"

namespace hjbd {

struct CheckResult {
  std::string name;
  bool passed = false;
  Vec observed;
  Vec bound_or_target;
  double tolerance = 0.0;
  std::string details;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  std::uint64_t seed = 0;
  std::string timestamp;

  bool all_passed() const;
};

std::string to_json(const CheckResult& check, int indent = -1);
std::string to_json(const VerificationReport& report, int indent = 2);

// UTC ISO-8601 time; SOURCE_DATE_EPOCH (seconds) overrides the clock.
std::string iso8601_timestamp();

// Random trial distributions: x uniform on [-x_max, x_max]^n, t and eps log-uniform.
struct TrialRanges {
  double x_max = 10.0;
  double t_lo = 0.05, t_hi = 50.0;
  double eps_lo = 0.01, eps_hi = 50.0;
};

// Every check below evaluates the posterior summary by quadrature for one-dimensional
// priors and priors without a closed form, and by closed form otherwise.
PosteriorSummary estimate_for_check(const Prior& prior, std::span<const double> x, const EstimatorParams& params);

CheckResult check_mse_bound(const Prior& prior, int trials, Rng& rng, const TrialRanges& ranges = {});
CheckResult check_map_pm_distance(const Prior& prior, int trials, Rng& rng, const TrialRanges& ranges = {});
CheckResult check_nonexpansive_monotone(const Prior& prior, int trials, Rng& rng, const TrialRanges& ranges = {});

// |u_PM(x + t_k d_k) - x| against |t_k d_k| + |z_k - u_MAP(z_k, t_k)| + sqrt(n t_k eps / (1 + m t_k))
// with z_k = x + t_k d_k, plus |u_PM - x| < 10 sqrt(n t_last eps) at the last step.
CheckResult check_t_to_zero(const Prior& prior, std::span<const double> x, double eps, std::span<const double> t_seq,
                            const std::vector<Vec>& d_seq);
// Random x in the domain, random bounded directions, t_k = 10^{-k/2} down to 1e-6.
CheckResult check_t_to_zero_trials(const Prior& prior, int trials, Rng& rng, const TrialRanges& ranges = {});

// Sup gaps of |S_eps - S_0| and |u_PM - u_MAP| over the (x, t) grid must not grow along
// eps_seq, and every final u gap obeys |u_PM - u_MAP| <= sqrt(n t eps_last).
CheckResult check_eps_to_zero(const Prior& prior, const std::vector<Vec>& xs, std::span<const double> ts,
                              std::span<const double> eps_seq);

// u_PM interior to dom J and J(u_PM) <= E[J] <= eps (exp(S_eps / eps) - 1).
CheckResult check_topology(const Prior& prior, int trials, Rng& rng, double x_max = 50.0);

// Finite-difference gradient of S_eps against the mean minimal subgradient, and the MSE
// identity n t eps - t E<pi(y), y - u_PM> against the direct second moment.
CheckResult check_representation(const Prior& prior, int trials, Rng& rng, const TrialRanges& ranges = {});

// ((1+mt)/t) E|y-y0|^2 <= E<phi(y) - phi(y0), y - y0> <= n eps - <phi(y0), u_PM - y0>
// with phi(y) = (y - x)/t + pi(y).
CheckResult check_monotonicity_inequality(const Prior& prior, int trials, Rng& rng, const TrialRanges& ranges = {});

// Grid argmin of the expected Bregman loss u -> E[D(u, phi(y))] against u_MAP.
// Throws GridError when the argmin sits on a grid endpoint.
CheckResult check_bregman_risk_1d(const Prior& prior, double x, double t, double eps, const Grid1D& grid);

struct MoreauGrids {
  double k_spacing = 0.0025;  // grid of the K_eps table
  double y_spacing = 0.005;   // grid of the outer minimization
  double y_margin = 3.0;      // y grid extends this far beyond u_PM of the checked x range
};
// t S_eps(x) = min_y { (x-y)^2/2 + K*(y) - y^2/2 } at every node of x_grid, with the
// argmin next to u_PM and y -> K*(y) - y^2/2 discretely convex.
CheckResult check_moreau_decomposition_1d(const Prior& prior, const Grid1D& x_grid, double t, double eps,
                                          const MoreauGrids& grids = {});

struct StaircasingSetup {
  double sigma = 20.0;
  double t = 20.0;
  double eps = 20.0;
  double lambda = 1.0;
  std::uint64_t noise_seed = 0;
  SamplerConfig sampler;
};
struct StaircasingOutcome {
  CheckResult check;
  Image noisy;
  Image map;
  Image pm;
};
StaircasingOutcome run_staircasing(const Image& clean, const StaircasingSetup& setup);
CheckResult check_staircasing(const Image& clean, const StaircasingSetup& setup);

// Residual convergence studies: at each sampled point the residual is evaluated for
// every step and the observed order is the smaller of the two halvings. Points whose
// residuals are all below `floor` are at roundoff level and pass.
struct OrderStudy {
  Vec steps{1e-2, 5e-3, 2.5e-3};
  double min_order = 1.5;
  double floor = 1e-9;
  double t_lo = 0.5, t_hi = 5.0;
  double eps = 1.0;
  double x_max = 5.0;
};
CheckResult check_viscous_order(const Prior& prior, int points, Rng& rng, const OrderStudy& study = {});
CheckResult check_heat_order(const Prior& prior, int points, Rng& rng, const OrderStudy& study = {});
// Points within 10 h (in x or t) of an l1 threshold are resampled.
CheckResult check_first_order_order(const Prior& prior, int points, Rng& rng, const OrderStudy& study = {});

// Shape properties of S_eps: joint convexity of S - (n eps/2) ln t (midpoints), strict
// decrease in t of S - (n eps/2) ln t, strict decrease in eps of S/eps - (n/2) ln eps,
// strict convexity of |x|^2/2 - t S in x.
CheckResult check_joint_convexity(const Prior& prior, int trials, Rng& rng, const TrialRanges& ranges = {});
CheckResult check_time_monotone(const Prior& prior, int trials, Rng& rng, const TrialRanges& ranges = {});
CheckResult check_viscosity_monotone(const Prior& prior, int trials, Rng& rng, const TrialRanges& ranges = {});
CheckResult check_k_eps_convex(const Prior& prior, int trials, Rng& rng, const TrialRanges& ranges = {});

// w_eps(x, t_k) -> exp(-J(x)/eps) along t_k -> 0 at an interior point.
CheckResult check_small_t_limit(const Prior& prior, std::span<const double> x, double eps,
                                std::span<const double> t_seq);

// Posterior means under the Moreau-smoothed priors approach the exact posterior mean.
CheckResult check_smoothing_limit(const Prior& prior, std::span<const double> x, const EstimatorParams& params,
                                  std::span<const double> mu_seq);

// Lax-Oleinik and Hopf values agree within 10 h^2 on a grid of spacing h.
CheckResult check_hopf_lax(const Prior& prior, const Grid1D& grid, std::span<const double> xs, double t);

// grad_x S_0(y, t_k) -> minimal subgradient of J at y as t_k -> 0.
CheckResult check_grad_s0_limit(const Prior& prior, std::span<const double> y, std::span<const double> t_seq);

enum class Suite { Core, Bounds, Pde, Imaging };
Suite suite_from_string(const std::string& name);
const char* to_string(Suite suite);

struct SuiteOptions {
  int imaging_size = 64;  // side of the square test image
  SamplerConfig sampler;  // imaging suite only; its seed is replaced by the report seed
};

// Runs every check of a suite. Each check draws from its own generator seeded from
// the report seed, so results do not depend on execution order.
VerificationReport run_suite(Suite suite, std::uint64_t seed, const SuiteOptions& options = {});

}  // namespace hjbd
