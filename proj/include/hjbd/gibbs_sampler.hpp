#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hjbd/random.hpp"
#include "hjbd/tv_imaging.hpp"

namespace hjbd {

struct SamplerConfig {
  int sweeps = 20000;
  int burn_in = 2000;
  std::uint64_t seed = 0;
  int chains = 4;
  int thin = 1;

  void validate() const;
};

// Density proportional to exp(-(a y^2 / 2 - b_k y + c_k)) on segment k, where the
// segments are delimited by the sorted breakpoints (segment 0 is left of the first).
struct PiecewiseGaussian1D {
  std::vector<double> breakpoints;
  double a = 1.0;
  std::vector<double> b;
  std::vector<double> c;

  std::size_t segments() const { return b.size(); }
  // log of the unnormalized mass of segment k.
  double log_segment_mass(std::size_t k) const;
  // Unnormalized log density at y.
  double log_density(double y) const;
};

// Builds a piecewise Gaussian from a single-site exponent
// (y - x)^2 / 2t eps + (lambda / eps) sum_j |y - v_j|.
PiecewiseGaussian1D make_piecewise_gaussian(double x, double t, double eps, double lambda,
                                            std::vector<double> neighbours);

// Full conditional of pixel `index` under the TV posterior, given the current state.
PiecewiseGaussian1D conditional_density(const Image& state, std::size_t index, const Image& x, double t,
                                        double eps, double lambda);

// Exact draw: segment by mass, then truncated-Gaussian inversion inside it.
double sample_piecewise_gaussian(const PiecewiseGaussian1D& pg, Rng& rng);

struct McmcResult {
  Image mean_image;
  Image stderr_image;    // batch-means Monte Carlo standard error of each pixel mean
  Image variance_image;  // posterior variance estimate per pixel
  double rhat_max = 1.0;
  long long accepted_sweeps = 0;  // recorded sweeps over all chains
  bool converged = true;          // rhat_max <= 1.1
};

// Raster-scan Gibbs sampling of the anisotropic-TV posterior; chain c is seeded
// with seed + c and chains run in parallel.
McmcResult posterior_mean_mcmc(const Image& x, double t, double eps, double lambda, const SamplerConfig& cfg);

}  // namespace hjbd
