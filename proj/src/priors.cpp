#include "hjbd/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hjbd/error.hpp"
#include "hjbd/special.hpp"
#include "hjbd/tv_imaging.hpp"

namespace hjbd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be positive and finite");
}

// Minimal-norm subgradient of lambda * anisotropic TV: for edges with a tie the dual
// variable is free in [-1, 1] and chosen to minimize ||D^T p||.
Vec tv_min_subgradient(const Prior::AnisotropicTV2D& tv, std::span<const double> y) {
  const std::size_t w = tv.width, h = tv.height, n = w * h;
  struct Edge {
    std::size_t i, j;
    double p;
    bool free;
  };
  std::vector<Edge> edges;
  auto add = [&](std::size_t i, std::size_t j) {
    const double d = y[j] - y[i];
    edges.push_back({i, j, d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0), d == 0.0});
  };
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t i = r * w + c;
      if (c + 1 < w) add(i, i + 1);
      if (r + 1 < h) add(i, i + w);
    }
  }
  // g = D^T p, with (Dy)_e = y_j - y_i.
  Vec g(n, 0.0);
  for (const Edge& e : edges) {
    g[e.i] -= e.p;
    g[e.j] += e.p;
  }
  const bool any_free = std::any_of(edges.begin(), edges.end(), [](const Edge& e) { return e.free; });
  for (int sweep = 0; any_free && sweep < 10000; ++sweep) {
    double max_step = 0.0;
    for (Edge& e : edges) {
      if (!e.free) continue;
      const double p_new = std::clamp(e.p + 0.5 * (g[e.i] - g[e.j]), -1.0, 1.0);
      const double delta = p_new - e.p;
      if (delta == 0.0) continue;
      g[e.i] -= delta;
      g[e.j] += delta;
      e.p = p_new;
      max_step = std::max(max_step, std::abs(delta));
    }
    if (max_step < 1e-15) break;
  }
  for (double& v : g) v *= tv.lambda;
  return g;
}

}  // namespace

const char* to_string(DomainLocation loc) {
  switch (loc) {
    case DomainLocation::Interior:
      return "Interior";
    case DomainLocation::Boundary:
      return "Boundary";
    case DomainLocation::Outside:
      return "Outside";
  }
  return "?";
}

Prior Prior::zero(std::size_t dim) {
  if (dim == 0) throw InvalidArgument("Zero prior: dimension must be positive");
  return Prior(Zero{dim});
}

Prior Prior::quadratic(double m, std::size_t dim) {
  require_positive(m, "Quadratic prior: m");
  if (dim == 0) throw InvalidArgument("Quadratic prior: dimension must be positive");
  return Prior(Quadratic{m, dim});
}

Prior Prior::weighted_l1(Vec lambda) {
  if (lambda.empty()) throw InvalidArgument("WeightedL1 prior: lambda must be non-empty");
  for (double l : lambda) require_positive(l, "WeightedL1 prior: lambda");
  return Prior(WeightedL1{std::move(lambda)});
}

Prior Prior::anisotropic_tv(double lambda, std::size_t width, std::size_t height) {
  require_positive(lambda, "AnisotropicTV2D prior: lambda");
  if (width == 0 || height == 0) throw InvalidArgument("AnisotropicTV2D prior: empty grid");
  return Prior(AnisotropicTV2D{lambda, width, height});
}

Prior Prior::ball(double radius, std::size_t dim) {
  require_positive(radius, "BallIndicator prior: radius");
  if (dim == 0) throw InvalidArgument("BallIndicator prior: dimension must be positive");
  return Prior(BallIndicator{radius, dim});
}

std::size_t Prior::dim() const {
  return std::visit(overloaded{
                        [](const Zero& z) { return z.dim; },
                        [](const Quadratic& q) { return q.dim; },
                        [](const WeightedL1& l) { return l.lambda.size(); },
                        [](const AnisotropicTV2D& tv) { return tv.width * tv.height; },
                        [](const BallIndicator& b) { return b.dim; },
                    },
                    kind_);
}

std::string Prior::name() const {
  return std::visit(overloaded{
                        [](const Zero&) { return std::string("Zero"); },
                        [](const Quadratic&) { return std::string("Quadratic"); },
                        [](const WeightedL1&) { return std::string("WeightedL1"); },
                        [](const AnisotropicTV2D&) { return std::string("AnisotropicTV2D"); },
                        [](const BallIndicator&) { return std::string("BallIndicator"); },
                    },
                    kind_);
}

double Prior::eval(std::span<const double> y) const {
  require_dim(y.size(), dim(), "Prior::eval");
  return std::visit(overloaded{
                        [](const Zero&) { return 0.0; },
                        [&](const Quadratic& q) { return 0.5 * q.m * norm_sq(y); },
                        [&](const WeightedL1& l) {
                          double s = 0.0;
                          for (std::size_t i = 0; i < y.size(); ++i) s += l.lambda[i] * std::abs(y[i]);
                          return s;
                        },
                        [&](const AnisotropicTV2D& tv) {
                          double s = 0.0;
                          for (std::size_t r = 0; r < tv.height; ++r) {
                            for (std::size_t c = 0; c < tv.width; ++c) {
                              const std::size_t i = r * tv.width + c;
                              if (c + 1 < tv.width) s += std::abs(y[i + 1] - y[i]);
                              if (r + 1 < tv.height) s += std::abs(y[i + tv.width] - y[i]);
                            }
                          }
                          return tv.lambda * s;
                        },
                        [&](const BallIndicator& b) { return norm_sq(y) <= b.radius * b.radius ? 0.0 : kInf; },
                    },
                    kind_);
}

Vec Prior::prox(std::span<const double> x, double t) const {
  require_dim(x.size(), dim(), "Prior::prox");
  if (!(t > 0.0)) throw InvalidArgument("Prior::prox: t must be positive");
  return std::visit(overloaded{
                        [&](const Zero&) { return Vec(x.begin(), x.end()); },
                        [&](const Quadratic& q) { return scaled(x, 1.0 / (1.0 + q.m * t)); },
                        [&](const WeightedL1& l) {
                          Vec u(x.size());
                          for (std::size_t i = 0; i < x.size(); ++i)
                            u[i] = special::soft_threshold(x[i], t * l.lambda[i]);
                          return u;
                        },
                        [&](const AnisotropicTV2D& tv) {
                          const Image img(tv.width, tv.height, Vec(x.begin(), x.end()));
                          RofResult res = rof_map(img, t, tv.lambda);
                          if (!res.converged) {
                            throw ConvergenceError("TV prox did not converge (relative change " +
                                                       std::to_string(res.residual) + ")",
                                                   res.residual);
                          }
                          return std::move(res.image.pixels);
                        },
                        [&](const BallIndicator& b) {
                          const double nx = norm(x);
                          if (nx <= b.radius) return Vec(x.begin(), x.end());
                          // pull rounding overshoot back onto the closed ball
                          Vec p = scaled(x, b.radius / nx);
                          while (norm_sq(p) > b.radius * b.radius) p = scaled(p, 1.0 - 0x1.0p-52);
                          return p;
                        },
                    },
                    kind_);
}

Vec Prior::min_subgradient(std::span<const double> y) const {
  require_dim(y.size(), dim(), "Prior::min_subgradient");
  return std::visit(overloaded{
                        [&](const Zero&) { return Vec(y.size(), 0.0); },
                        [&](const Quadratic& q) { return scaled(y, q.m); },
                        [&](const WeightedL1& l) {
                          Vec g(y.size());
                          for (std::size_t i = 0; i < y.size(); ++i)
                            g[i] = y[i] > 0 ? l.lambda[i] : (y[i] < 0 ? -l.lambda[i] : 0.0);
                          return g;
                        },
                        [&](const AnisotropicTV2D& tv) { return tv_min_subgradient(tv, y); },
                        [&](const BallIndicator& b) {
                          // On the sphere the subdifferential is the normal cone, which contains 0.
                          if (norm_sq(y) > b.radius * b.radius)
                            throw InvalidArgument("BallIndicator: point outside the domain of the subdifferential");
                          return Vec(y.size(), 0.0);
                        },
                    },
                    kind_);
}

double Prior::strong_convexity() const {
  if (const auto* q = std::get_if<Quadratic>(&kind_)) return q->m;
  return 0.0;
}

DomainLocation Prior::domain_contains(std::span<const double> y) const {
  require_dim(y.size(), dim(), "Prior::domain_contains");
  if (const auto* b = std::get_if<BallIndicator>(&kind_)) {
    const double n = norm(y);
    if (n < b->radius) return DomainLocation::Interior;
    if (n == b->radius) return DomainLocation::Boundary;
    return DomainLocation::Outside;
  }
  return DomainLocation::Interior;
}

Prior Prior::with_dim(std::size_t n) const {
  return std::visit(overloaded{
                        [&](const Zero&) { return Prior::zero(n); },
                        [&](const Quadratic& q) { return Prior::quadratic(q.m, n); },
                        [&](const WeightedL1& l) {
                          if (l.lambda.size() == n) return *this;
                          // A single weight broadcasts to every coordinate.
                          if (l.lambda.size() == 1) return Prior::weighted_l1(Vec(n, l.lambda[0]));
                          throw InvalidArgument("WeightedL1: cannot resize lambda vector");
                        },
                        [&](const AnisotropicTV2D& tv) {
                          if (tv.width * tv.height != n) throw InvalidArgument("AnisotropicTV2D: grid size is fixed");
                          return *this;
                        },
                        [&](const BallIndicator& b) { return Prior::ball(b.radius, n); },
                    },
                    kind_);
}

}  // namespace hjbd
