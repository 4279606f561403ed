#pragma once

#include <span>
#include <vector>

#include "hjbd/first_order_hj.hpp"
#include "hjbd/linalg.hpp"
#include "hjbd/priors.hpp"
#include "hjbd/quadrature.hpp"

namespace hjbd {

struct EstimatorParams {
  double t = 1.0;
  double eps = 1.0;  // 0 selects the MAP estimate

  void validate() const;
};

struct PosteriorSummary {
  double w_eps = 0.0;      // exp(-S_eps / eps); may underflow to 0 for very large S_eps / eps
  double log_w_eps = 0.0;  // -S_eps / eps
  double s_eps = 0.0;
  Vec u_pm;
  double mse = 0.0;
  Vec grad_s_eps;
  double laplacian_s_eps = 0.0;  // NaN on the MAP route (eps = 0)
};

// Builds the remaining fields from S_eps, the posterior mean and the MSE.
PosteriorSummary make_summary(std::span<const double> x, const EstimatorParams& params, double s_eps, Vec u_pm,
                              double mse);

PosteriorSummary posterior_summary_quadrature(const Prior& prior, std::span<const double> x,
                                              const EstimatorParams& params, const QuadratureConfig& cfg = {});

PosteriorSummary posterior_summary_potential(const Potential& potential, std::span<const double> x,
                                             const EstimatorParams& params, const QuadratureConfig& cfg = {});

// Tikhonov closed forms; m = 0 is the Zero prior.
PosteriorSummary s_eps_closed_quadratic(double m, std::span<const double> x, const EstimatorParams& params);

// Weighted l1 closed forms through L(z) = erfcx(z) / 2 evaluated in log space.
PosteriorSummary u_pm_closed_l1(std::span<const double> lambda, std::span<const double> x,
                                const EstimatorParams& params);

enum class Method { Auto, Closed, Quadrature };

// Closed form where available (Auto), quadrature otherwise; eps = 0 returns the MAP
// estimate with S_0 in s_eps, zero MSE and NaN for w_eps and the Laplacian.
PosteriorSummary estimate(const Prior& prior, std::span<const double> x, const EstimatorParams& params,
                          Method method = Method::Auto, const QuadratureConfig& cfg = {});

bool has_closed_form(const Prior& prior);

// K_eps(x, t) = |x|^2 / 2 - t S_eps(x, t).
double k_eps(const Prior& prior, std::span<const double> x, const EstimatorParams& params,
             Method method = Method::Auto, const QuadratureConfig& cfg = {});

// K_eps tabulated on a grid, for discrete conjugation.
struct KEpsTable {
  Grid1D grid;
  Vec values;
};
KEpsTable k_eps_table(const Prior& prior, const EstimatorParams& params, const Grid1D& grid,
                      Method method = Method::Auto, const QuadratureConfig& cfg = {});

// K_eps*(y) = max over the grid of x y - K_eps(x); GridError on an endpoint maximizer.
double k_eps_conjugate(const KEpsTable& table, double y);

double k_eps_conjugate_1d(const Prior& prior, double y, const EstimatorParams& params, const Grid1D& grid,
                          const QuadratureConfig& cfg = {});

// Posterior means for the smoothed priors y -> S_0(y, mu_k).
std::vector<Vec> pm_via_moreau_smoothing(const Prior& prior, std::span<const double> x,
                                         const EstimatorParams& params, std::span<const double> mu_seq,
                                         const QuadratureConfig& cfg = {});

// E[min-norm subgradient of J at y] under the posterior; full-domain priors only.
Vec mean_min_subgradient(const Prior& prior, std::span<const double> x, const EstimatorParams& params,
                         const QuadratureConfig& cfg = {});

// |d_t S + 0.5 |grad S|^2 - (eps/2) Lap S| with every derivative a central difference of step h.
double viscous_residual(const Prior& prior, std::span<const double> x, const EstimatorParams& params, double h,
                        Method method = Method::Auto, const QuadratureConfig& cfg = {});

// |d_t w - (eps/2) Lap w| / w by central differences of step h.
double heat_residual(const Prior& prior, std::span<const double> x, const EstimatorParams& params, double h,
                     Method method = Method::Auto, const QuadratureConfig& cfg = {});

}  // namespace hjbd
