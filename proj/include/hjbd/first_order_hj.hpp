#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hjbd/linalg.hpp"
#include "hjbd/priors.hpp"

namespace hjbd {

struct EnvelopeResult {
  double value = 0.0;  // S_0(x, t)
  Vec minimizer;       // u_MAP(x, t)
  Vec gradient;        // (x - u_MAP) / t
};

// Moreau envelope / Lax-Oleinik value of J at (x, t) together with its minimizer.
EnvelopeResult envelope(const Prior& prior, std::span<const double> x, double t);

// Uniform grid on [lo, hi] with count >= 3 nodes.
struct Grid1D {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  Vec values;

  static Grid1D uniform(double lo, double hi, std::size_t count);
  double spacing() const { return (hi - lo) / static_cast<double>(count - 1); }
};

struct LegendreValue {
  double value;
  std::size_t index;  // argmax node
};

// max_i (p * grid[i] - f[i]) by exhaustive scan; +inf entries of f are skipped.
// Throws GridError when the maximizer is a grid endpoint and endpoint_is_error is set.
LegendreValue discrete_legendre(const Grid1D& grid, std::span<const double> f, double p,
                                bool endpoint_is_error = true);

struct HopfCheck {
  double lax;
  double hopf;
};

// Lax-Oleinik value (exact envelope) next to the Hopf value
// sup_p { p x - (t/2) p^2 - J*(p) } with both transforms taken on the grid.
HopfCheck hopf_check_1d(const Prior& prior, const Grid1D& grid, double x, double t);

// grad_x S_0(y, t_k) for each t_k.
std::vector<Vec> grad_s0_limit_check(const Prior& prior, std::span<const double> y,
                                     std::span<const double> t_seq);

// |d_t S_0 + 0.5 |grad_x S_0|^2| with every derivative from central differences
// of the envelope value (steps hx per coordinate and ht).
double first_order_residual(const Prior& prior, std::span<const double> x, double t, double hx,
                            double ht);

}  // namespace hjbd
