#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "hjbd/linalg.hpp"
#include "hjbd/priors.hpp"

namespace hjbd {

struct QuadratureConfig {
  double window = 12.0;         // half-width in posterior standard-deviation units
  int nodes_per_dim = 2001;     // level-0 resolution target
  double refine_tol = 1e-10;
  int max_refine = 6;

  void validate() const;
};

struct Interval {
  double lo;
  double hi;
};

// The convex potential J seen by the tensor quadrature. Coordinates are integrated
// in order 0, 1, ..., so everything an axis needs is expressed through the prefix
// y[0..axis) of already fixed coordinates.
class Potential {
 public:
  virtual ~Potential() = default;
  virtual std::size_t dim() const = 0;
  // J(y), +inf outside the domain.
  virtual double value(std::span<const double> y) const = 0;
  // Part of J attributed to coordinate `axis`; y holds at least axis + 1 entries.
  // Summed over all axes this reproduces J on its domain.
  virtual double increment(std::size_t axis, std::span<const double> y) const = 0;
  // Admissible range of coordinate `axis` inside dom J given the prefix.
  virtual Interval section(std::size_t axis, std::span<const double> prefix) const;
  // Points where the increment of `axis` is not smooth, given the prefix.
  virtual void kinks(std::size_t axis, std::span<const double> prefix, std::vector<double>& out) const;
  // Minimizer of |x - y|^2 / 2t + J(y).
  virtual Vec mode(std::span<const double> x, double t) const = 0;
  // Lower bound on the strong convexity of J.
  virtual double curvature() const { return 0.0; }
  // True when increments, sections and kinks of an axis ignore the prefix.
  virtual bool separable() const { return false; }
};

class PriorPotential final : public Potential {
 public:
  explicit PriorPotential(const Prior& prior);
  std::size_t dim() const override { return prior_.dim(); }
  double value(std::span<const double> y) const override { return prior_.eval(y); }
  double increment(std::size_t axis, std::span<const double> y) const override;
  Interval section(std::size_t axis, std::span<const double> prefix) const override;
  void kinks(std::size_t axis, std::span<const double> prefix, std::vector<double>& out) const override;
  Vec mode(std::span<const double> x, double t) const override { return prior_.prox(x, t); }
  double curvature() const override { return prior_.strong_convexity(); }
  bool separable() const override;

 private:
  Prior prior_;
};

// The Moreau envelope y -> S_0(y, mu) of a prior, used as a smooth full-domain stand-in.
class SmoothedPotential final : public Potential {
 public:
  SmoothedPotential(const Prior& prior, double mu);
  std::size_t dim() const override { return prior_.dim(); }
  double value(std::span<const double> y) const override;
  double increment(std::size_t axis, std::span<const double> y) const override;
  void kinks(std::size_t axis, std::span<const double> prefix, std::vector<double>& out) const override;
  Vec mode(std::span<const double> x, double t) const override;
  double curvature() const override;
  bool separable() const override { return !prior_.is<Prior::BallIndicator>(); }

 private:
  Prior prior_;
  double mu_;
};

// Extra expectations: fills out[0..k) with f(y) for a quadrature node y.
using MomentFn = std::function<void(std::span<const double> y, std::span<double> out)>;

struct PosteriorMoments {
  Vec center;             // mode c of the posterior
  double phi_ref = 0.0;   // |x - c|^2 / 2t + J(c)
  double log_mass = 0.0;  // log of the integral of exp(-(Phi(y) - phi_ref) / eps)
  Vec mean;               // E[y]
  double second_central = 0.0;  // E|y - c|^2
  double mse = 0.0;             // E|y - E[y]|^2
  Vec extras;                   // E[f(y)] for the optional MomentFn
  int level = 0;
  std::size_t nodes = 0;
};

// Expectations under the density proportional to exp(-(|x - y|^2 / 2t + J(y)) / eps),
// by nested composite Gauss-Legendre quadrature with level doubling until two
// consecutive levels agree to cfg.refine_tol. Throws RefinementError otherwise.
PosteriorMoments posterior_moments(const Potential& potential, std::span<const double> x, double t,
                                   double eps, const QuadratureConfig& cfg,
                                   const MomentFn& extra = {}, std::size_t extra_count = 0);

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

}  // namespace hjbd
