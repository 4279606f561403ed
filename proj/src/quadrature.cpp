#include "hjbd/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "hjbd/error.hpp"

namespace hjbd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kGauss = 20;
// Nodes whose partial exponent already exceeds this are dropped; every increment is
// nonnegative, so their weight stays below e^-100.
constexpr double kPrune = 100.0;
// Allowed change of the local exponent across one panel at level 0.
constexpr double kSteep = 16.0;
constexpr int kMaxGrading = 60;

struct Neumaier {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double s = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - s) + v;
    else
      comp += (v - s) + sum;
    sum = s;
  }
  double value() const { return sum + comp; }
};

enum class End { Clip, Kink, Boundary };

struct Node {
  double y;
  double w;
  double term;  // this axis' share of the exponent, already divided by eps
};

struct LevelResult {
  double log_mass;
  Vec mean_offset;
  double second;
  Vec extras;
  std::size_t nodes;
};

class Engine {
 public:
  Engine(const Potential& pot, std::span<const double> x, double t, double eps, Vec center,
         double phi_ref, double half, const MomentFn& extra, std::size_t extra_count)
      : pot_(pot),
        x_(x.begin(), x.end()),
        t_(t),
        eps_(eps),
        c_(std::move(center)),
        phi_ref_(phi_ref),
        half_(half),
        n_(x.size()),
        separable_(pot.separable()),
        extra_(extra),
        extra_count_(extra_count),
        buffers_(n_),
        y_(n_),
        extra_tmp_(extra_count),
        extra_local_(extra_count) {}

  LevelResult run(int level, int base_panels) {
    panels_ = base_panels << level;
    steep_ = kSteep / static_cast<double>(1 << level);
    boundary_depth_ = 12 + 8 * level;
    z_ = {};
    m1_.assign(n_, Neumaier{});
    m2_ = {};
    ext_.assign(extra_count_, Neumaier{});
    nodes_ = 0;
    if (separable_) {
      for (std::size_t k = 0; k < n_; ++k) build_axis(k, buffers_[k]);
      // Innermost sums factor out of the nested loops.
      const std::vector<Node>& last = buffers_[n_ - 1];
      inner_min_ = kInf;
      for (const Node& nd : last) inner_min_ = std::min(inner_min_, nd.term);
      inner_s0_ = inner_s1_ = inner_s2_ = 0.0;
      for (const Node& nd : last) {
        const double w = nd.w * std::exp(-(nd.term - inner_min_));
        const double d = nd.y - c_[n_ - 1];
        inner_s0_ += w;
        inner_s1_ += w * d;
        inner_s2_ += w * d * d;
      }
    }
    recurse(0, -phi_ref_ / eps_, 1.0);

    const double z = z_.value();
    if (!(z > 0.0) || !std::isfinite(z)) throw NumericalError("quadrature: posterior mass vanished");
    LevelResult r;
    r.log_mass = std::log(z);
    r.mean_offset.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) r.mean_offset[j] = m1_[j].value() / z;
    r.second = m2_.value() / z;
    r.extras.resize(extra_count_);
    for (std::size_t j = 0; j < extra_count_; ++j) r.extras[j] = ext_[j].value() / z;
    r.nodes = nodes_;
    return r;
  }

 private:
  double local_term(std::size_t k, double s) {
    y_[k] = s;
    const double d = x_[k] - s;
    return (d * d / (2.0 * t_) + pot_.increment(k, std::span<const double>(y_.data(), k + 1))) / eps_;
  }

  int grading_depth(std::size_t k, double e, double inward, End kind) {
    if (kind == End::Clip) return 0;
    const double delta = std::abs(local_term(k, e + inward) - local_term(k, e));
    int d = 0;
    if (delta > steep_) d = static_cast<int>(std::ceil(std::log2(delta / steep_)));
    if (kind == End::Boundary && k + 1 < n_) d = std::max(d, boundary_depth_);
    return std::min(d, kMaxGrading);
  }

  void emit(std::size_t k, double a, double b, std::vector<Node>& out) {
    const GaussRule& g = gauss_legendre(kGauss);
    const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
    for (int i = 0; i < kGauss; ++i) {
      const double s = mid + hw * g.nodes[i];
      out.push_back({s, hw * g.weights[i], local_term(k, s)});
    }
  }

  // Panel [a, b] split geometrically toward a (depth > 0 levels).
  void emit_graded_toward_lo(std::size_t k, double a, double b, int depth, std::vector<Node>& out) {
    double right = b;
    for (int j = 1; j <= depth; ++j) {
      const double left = a + (b - a) * std::ldexp(1.0, -j);
      emit(k, left, right, out);
      right = left;
    }
    emit(k, a, right, out);
  }

  void emit_graded_toward_hi(std::size_t k, double a, double b, int depth, std::vector<Node>& out) {
    double left = a;
    for (int j = 1; j <= depth; ++j) {
      const double right = b - (b - a) * std::ldexp(1.0, -j);
      emit(k, left, right, out);
      left = right;
    }
    emit(k, left, b, out);
  }

  void build_axis(std::size_t k, std::vector<Node>& out) {
    out.clear();
    const std::span<const double> prefix(y_.data(), k);
    double lo = c_[k] - half_, hi = c_[k] + half_;
    End lo_kind = End::Clip, hi_kind = End::Clip;
    const Interval sec = pot_.section(k, prefix);
    if (sec.lo > lo) {
      lo = sec.lo;
      lo_kind = End::Boundary;
    }
    if (sec.hi < hi) {
      hi = sec.hi;
      hi_kind = End::Boundary;
    }
    if (!(lo < hi)) return;

    kinks_.clear();
    pot_.kinks(k, prefix, kinks_);
    std::sort(kinks_.begin(), kinks_.end());
    kinks_.erase(std::unique(kinks_.begin(), kinks_.end()), kinks_.end());

    breaks_.clear();
    kinds_.clear();
    breaks_.push_back(lo);
    kinds_.push_back(lo_kind);
    for (double kk : kinks_) {
      if (kk > lo && kk < hi) {
        breaks_.push_back(kk);
        kinds_.push_back(End::Kink);
      }
    }
    breaks_.push_back(hi);
    kinds_.push_back(hi_kind);

    const double nominal = 2.0 * half_ / static_cast<double>(panels_);
    for (std::size_t p = 0; p + 1 < breaks_.size(); ++p) {
      const double a = breaks_[p], b = breaks_[p + 1];
      int q = std::max(1, static_cast<int>(std::ceil((b - a) / nominal - 1e-9)));
      double h = (b - a) / q;
      int da = grading_depth(k, a, h, kinds_[p]);
      int db = grading_depth(k, b, -h, kinds_[p + 1]);
      if (q == 1 && da > 0 && db > 0) {
        q = 2;
        h = (b - a) / 2;
        da = grading_depth(k, a, h, kinds_[p]);
        db = grading_depth(k, b, -h, kinds_[p + 1]);
      }
      for (int i = 0; i < q; ++i) {
        const double pa = a + h * i;
        const double pb = i + 1 == q ? b : a + h * (i + 1);
        if (i == 0 && da > 0)
          emit_graded_toward_lo(k, pa, pb, da, out);
        else if (i + 1 == q && db > 0)
          emit_graded_toward_hi(k, pa, pb, db, out);
        else
          emit(k, pa, pb, out);
      }
    }
  }

  void recurse(std::size_t k, double cum, double pw) {
    std::vector<Node>& nodes = buffers_[k];
    if (!separable_) build_axis(k, nodes);
    if (k + 1 < n_) {
      for (const Node& nd : nodes) {
        const double e = cum + nd.term;
        if (e > kPrune) continue;
        y_[k] = nd.y;
        recurse(k + 1, e, pw * nd.w);
      }
      return;
    }

    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    std::fill(extra_local_.begin(), extra_local_.end(), 0.0);
    const double ck = c_[k];
    if (separable_ && extra_count_ == 0) {
      const double f = std::exp(-(cum + inner_min_));
      s0 = f * inner_s0_;
      s1 = f * inner_s1_;
      s2 = f * inner_s2_;
    } else {
    for (const Node& nd : nodes) {
      const double e = cum + nd.term;
      if (e > kPrune) continue;
      const double w = nd.w * std::exp(-e);
      const double d = nd.y - ck;
      s0 += w;
      s1 += w * d;
      s2 += w * d * d;
      if (extra_count_ > 0) {
        y_[k] = nd.y;
        extra_(y_, extra_tmp_);
        for (std::size_t j = 0; j < extra_count_; ++j) extra_local_[j] += w * extra_tmp_[j];
      }
    }
    }
    nodes_ += nodes.size();
    if (s0 == 0.0) return;
    double prefix_sq = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double d = y_[j] - c_[j];
      prefix_sq += d * d;
      m1_[j].add(pw * s0 * d);
    }
    z_.add(pw * s0);
    m1_[k].add(pw * s1);
    m2_.add(pw * (s0 * prefix_sq + s2));
    for (std::size_t j = 0; j < extra_count_; ++j) ext_[j].add(pw * extra_local_[j]);
  }

  const Potential& pot_;
  Vec x_;
  double t_, eps_;
  Vec c_;
  double phi_ref_;
  double half_;
  std::size_t n_;
  bool separable_;
  const MomentFn& extra_;
  std::size_t extra_count_;

  int panels_ = 0;
  double steep_ = kSteep;
  int boundary_depth_ = 12;
  double inner_min_ = 0.0;
  double inner_s0_ = 0.0, inner_s1_ = 0.0, inner_s2_ = 0.0;

  std::vector<std::vector<Node>> buffers_;
  Vec y_;
  Vec extra_tmp_;
  Vec extra_local_;
  std::vector<double> kinks_;
  std::vector<double> breaks_;
  std::vector<End> kinds_;

  Neumaier z_;
  std::vector<Neumaier> m1_;
  Neumaier m2_;
  std::vector<Neumaier> ext_;
  std::size_t nodes_ = 0;
};

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

bool agree(const LevelResult& fine, const LevelResult& coarse, const Vec& center, double tol) {
  if (std::abs(fine.log_mass - coarse.log_mass) > tol) return false;
  for (std::size_t j = 0; j < fine.mean_offset.size(); ++j) {
    const double a = center[j] + fine.mean_offset[j], b = center[j] + coarse.mean_offset[j];
    if (!close(a, b, tol)) return false;
  }
  if (!close(fine.second, coarse.second, tol)) return false;
  for (std::size_t j = 0; j < fine.extras.size(); ++j)
    if (!close(fine.extras[j], coarse.extras[j], tol)) return false;
  return true;
}

GaussRule compute_gauss_legendre(int n) {
  GaussRule g;
  g.nodes.resize(n);
  g.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    g.nodes[i] = -z;
    g.nodes[n - 1 - i] = z;
    g.weights[i] = g.weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return g;
}

}  // namespace

void QuadratureConfig::validate() const {
  if (!(window >= 6.0)) throw InvalidArgument("QuadratureConfig: window must be at least 6");
  if (nodes_per_dim < 51 || nodes_per_dim % 2 == 0)
    throw InvalidArgument("QuadratureConfig: nodes_per_dim must be odd and at least 51");
  if (!(refine_tol > 0.0)) throw InvalidArgument("QuadratureConfig: refine_tol must be positive");
  if (max_refine < 1) throw InvalidArgument("QuadratureConfig: max_refine must be at least 1");
}

Interval Potential::section(std::size_t, std::span<const double>) const { return {-kInf, kInf}; }

void Potential::kinks(std::size_t, std::span<const double>, std::vector<double>&) const {}

PriorPotential::PriorPotential(const Prior& prior) : prior_(prior) {}

bool PriorPotential::separable() const {
  return prior_.is<Prior::Zero>() || prior_.is<Prior::Quadratic>() || prior_.is<Prior::WeightedL1>();
}

double PriorPotential::increment(std::size_t axis, std::span<const double> y) const {
  const double v = y[axis];
  if (const auto* q = std::get_if<Prior::Quadratic>(&prior_.kind())) return 0.5 * q->m * v * v;
  if (const auto* l = std::get_if<Prior::WeightedL1>(&prior_.kind())) return l->lambda[axis] * std::abs(v);
  if (const auto* tv = std::get_if<Prior::AnisotropicTV2D>(&prior_.kind())) {
    double s = 0.0;
    if (axis % tv->width != 0) s += std::abs(v - y[axis - 1]);
    if (axis >= tv->width) s += std::abs(v - y[axis - tv->width]);
    return tv->lambda * s;
  }
  return 0.0;
}

Interval PriorPotential::section(std::size_t, std::span<const double> prefix) const {
  if (const auto* b = std::get_if<Prior::BallIndicator>(&prior_.kind())) {
    const double s2 = b->radius * b->radius - norm_sq(prefix);
    if (s2 <= 0.0) return {0.0, 0.0};
    const double s = std::sqrt(s2);
    return {-s, s};
  }
  return {-kInf, kInf};
}

void PriorPotential::kinks(std::size_t axis, std::span<const double> prefix, std::vector<double>& out) const {
  if (prior_.is<Prior::WeightedL1>()) {
    out.push_back(0.0);
  } else if (const auto* tv = std::get_if<Prior::AnisotropicTV2D>(&prior_.kind())) {
    if (axis % tv->width != 0) out.push_back(prefix[axis - 1]);
    if (axis >= tv->width) out.push_back(prefix[axis - tv->width]);
  }
}

SmoothedPotential::SmoothedPotential(const Prior& prior, double mu) : prior_(prior), mu_(mu) {
  if (!(mu > 0.0)) throw InvalidArgument("SmoothedPotential: mu must be positive");
  if (prior.is<Prior::AnisotropicTV2D>()) throw InvalidArgument("SmoothedPotential: TV is not supported");
}

namespace {
double huber(double v, double lambda, double mu) {
  const double a = std::abs(v);
  if (a <= mu * lambda) return v * v / (2.0 * mu);
  return lambda * a - 0.5 * mu * lambda * lambda;
}
}  // namespace

double SmoothedPotential::value(std::span<const double> y) const {
  if (const auto* b = std::get_if<Prior::BallIndicator>(&prior_.kind())) {
    const double d = std::max(0.0, norm(y) - b->radius);
    return d * d / (2.0 * mu_);
  }
  double s = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) s += increment(k, y);
  return s;
}

double SmoothedPotential::increment(std::size_t axis, std::span<const double> y) const {
  const double v = y[axis];
  if (const auto* q = std::get_if<Prior::Quadratic>(&prior_.kind())) return q->m * v * v / (2.0 * (1.0 + q->m * mu_));
  if (const auto* l = std::get_if<Prior::WeightedL1>(&prior_.kind())) return huber(v, l->lambda[axis], mu_);
  if (prior_.is<Prior::BallIndicator>()) {
    if (axis + 1 < prior_.dim()) return 0.0;
    return value(y.first(axis + 1));
  }
  return 0.0;
}

void SmoothedPotential::kinks(std::size_t axis, std::span<const double> prefix, std::vector<double>& out) const {
  if (const auto* l = std::get_if<Prior::WeightedL1>(&prior_.kind())) {
    out.push_back(-mu_ * l->lambda[axis]);
    out.push_back(mu_ * l->lambda[axis]);
  } else if (const auto* b = std::get_if<Prior::BallIndicator>(&prior_.kind())) {
    const double s2 = b->radius * b->radius - norm_sq(prefix);
    if (s2 > 0.0) {
      out.push_back(-std::sqrt(s2));
      out.push_back(std::sqrt(s2));
    }
  }
}

Vec SmoothedPotential::mode(std::span<const double> x, double t) const {
  const Vec p = prior_.prox(x, t + mu_);
  Vec u(x.begin(), x.end());
  const double s = t / (t + mu_);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] += s * (p[i] - x[i]);
  return u;
}

double SmoothedPotential::curvature() const {
  if (const auto* q = std::get_if<Prior::Quadratic>(&prior_.kind())) return q->m / (1.0 + q->m * mu_);
  return 0.0;
}

const GaussRule& gauss_legendre(int n) {
  if (n < 1 || n > 200) throw InvalidArgument("gauss_legendre: order out of range");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

PosteriorMoments posterior_moments(const Potential& potential, std::span<const double> x, double t,
                                   double eps, const QuadratureConfig& cfg, const MomentFn& extra,
                                   std::size_t extra_count) {
  cfg.validate();
  const std::size_t n = potential.dim();
  require_dim(x.size(), n, "posterior_moments");
  if (n == 0 || n > 3) throw InvalidArgument("posterior_moments: tensor quadrature supports dimension 1 to 3");
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("posterior_moments: t must be positive");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("posterior_moments: eps must be positive");
  if (extra_count > 0 && !extra) throw InvalidArgument("posterior_moments: missing moment function");

  PosteriorMoments out;
  out.center = potential.mode(x, t);
  out.phi_ref = dist_sq(x, out.center) / (2.0 * t) + potential.value(out.center);
  if (!std::isfinite(out.phi_ref)) throw NumericalError("posterior_moments: mode outside the domain");

  // The posterior is (1 + m t)/(t eps)-strongly log-concave, so its tails beyond
  // `window` of these units from the mode carry relative mass below e^{-window^2/2}.
  const double half = cfg.window * std::sqrt(t * eps / (1.0 + potential.curvature() * t));
  const int n0 = n == 1 ? cfg.nodes_per_dim
                        : std::max(51, static_cast<int>(std::lround(std::pow(cfg.nodes_per_dim, 1.0 / n))));
  const int base_panels = std::max(2, (n0 + kGauss - 1) / kGauss);

  Engine engine(potential, x, t, eps, out.center, out.phi_ref, half, extra, extra_count);
  LevelResult prev = engine.run(0, base_panels);
  for (int level = 1; level <= cfg.max_refine; ++level) {
    LevelResult cur = engine.run(level, base_panels);
    if (agree(cur, prev, out.center, cfg.refine_tol)) {
      out.log_mass = cur.log_mass;
      out.mean.resize(n);
      double off_sq = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        out.mean[j] = out.center[j] + cur.mean_offset[j];
        off_sq += cur.mean_offset[j] * cur.mean_offset[j];
      }
      out.second_central = cur.second;
      out.mse = std::max(0.0, cur.second - off_sq);
      out.extras = std::move(cur.extras);
      out.level = level;
      out.nodes = cur.nodes;
      return out;
    }
    prev = std::move(cur);
  }
  throw RefinementError("quadrature did not reach tolerance " + std::to_string(cfg.refine_tol) + " after " +
                        std::to_string(cfg.max_refine) + " refinements");
}

}  // namespace hjbd
