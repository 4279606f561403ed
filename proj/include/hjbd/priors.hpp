#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hjbd/linalg.hpp"

namespace hjbd {

enum class DomainLocation { Interior, Boundary, Outside };

const char* to_string(DomainLocation loc);

// A convex, lower semicontinuous regularizer J with inf J = 0 and a domain
// with non-empty interior. Every kind is normalized to inf J = 0 by construction.
class Prior {
 public:
  struct Zero {
    std::size_t dim;
  };
  struct Quadratic {  // (m/2)||y||^2
    double m;
    std::size_t dim;
  };
  struct WeightedL1 {  // sum_i lambda_i |y_i|
    Vec lambda;
  };
  struct AnisotropicTV2D {  // lambda * anisotropic TV on a width x height grid
    double lambda;
    std::size_t width;
    std::size_t height;
  };
  struct BallIndicator {  // 0 on the closed Euclidean ball of given radius, +inf outside
    double radius;
    std::size_t dim;
  };
  using Kind = std::variant<Zero, Quadratic, WeightedL1, AnisotropicTV2D, BallIndicator>;

  static Prior zero(std::size_t dim);
  static Prior quadratic(double m, std::size_t dim);
  static Prior weighted_l1(Vec lambda);
  static Prior anisotropic_tv(double lambda, std::size_t width, std::size_t height);
  static Prior ball(double radius, std::size_t dim);

  const Kind& kind() const { return kind_; }
  std::size_t dim() const;
  std::string name() const;

  template <class K>
  bool is() const {
    return std::holds_alternative<K>(kind_);
  }
  template <class K>
  const K& as() const {
    return std::get<K>(kind_);
  }

  // J(y) in [0, +inf]; +inf exactly outside dom J.
  double eval(std::span<const double> y) const;

  // argmin_y (1/2t)||x - y||^2 + J(y).
  Vec prox(std::span<const double> x, double t) const;

  // The minimal-norm element of the subdifferential at y.
  Vec min_subgradient(std::span<const double> y) const;

  double strong_convexity() const;

  DomainLocation domain_contains(std::span<const double> y) const;

  bool full_domain() const { return !is<BallIndicator>(); }

  // Same prior family with its dimension changed (only for kinds with a free dimension).
  Prior with_dim(std::size_t dim) const;

 private:
  explicit Prior(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

}  // namespace hjbd
