#include "hjbd/gibbs_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hjbd/error.hpp"
#include "hjbd/parallel.hpp"
#include "hjbd/special.hpp"

namespace hjbd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr int kBatches = 20;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

// Inverse of the standard normal restricted to [lo, hi] at probability u, to 1e-12 in z.
double truncated_normal_inverse(double lo, double hi, double u) {
  if (hi <= 0.0) return -truncated_normal_inverse(-hi, -lo, 1.0 - u);
  if (lo >= 0.0) {
    // Upper tail: solve log Q(z) = log(Q(lo) - u (Q(lo) - Q(hi))).
    const double lq_lo = special::log_normal_sf(lo);
    const double lq_hi = special::log_normal_sf(hi);
    const double target = lq_lo + std::log1p(-u * -std::expm1(lq_hi - lq_lo));
    double left = lo, right = std::min(hi, lo + 40.0);
    double z = std::clamp(lo + (lq_lo - target) / std::max(lo, 1.0), left, right);
    for (int it = 0; it < 200; ++it) {
      const double f = special::log_normal_sf(z) - target;  // decreasing in z
      if (f > 0.0)
        left = z;
      else
        right = z;
      const double slope = -std::sqrt(2.0 / std::numbers::pi) / special::erfcx(z / kSqrt2);
      double next = z - f / slope;
      if (!(next > left && next < right)) next = 0.5 * (left + right);
      const double step = std::abs(next - z);
      z = next;
      if (step < 1e-12 || right - left < 1e-12) break;
    }
    return z;
  }
  // The interval straddles 0: plain CDF differences are well conditioned.
  const double flo = lo == -kInf ? 0.0 : normal_cdf(lo);
  const double fhi = hi == kInf ? 1.0 : normal_cdf(hi);
  const double target = flo + u * (fhi - flo);
  double left = std::max(lo, -40.0), right = std::min(hi, 40.0);
  double z = std::clamp(0.0, left, right);
  for (int it = 0; it < 200; ++it) {
    const double f = normal_cdf(z) - target;
    if (f < 0.0)
      left = z;
    else
      right = z;
    const double dens = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    double next = dens > 0.0 ? z - f / dens : 0.5 * (left + right);
    if (!(next > left && next < right)) next = 0.5 * (left + right);
    const double step = std::abs(next - z);
    z = next;
    if (step < 1e-12 || right - left < 1e-12) break;
  }
  return z;
}

}  // namespace

void SamplerConfig::validate() const {
  if (burn_in < 0) throw InvalidArgument("sampler: burn_in must be nonnegative");
  if (sweeps <= burn_in) throw InvalidArgument("sampler: sweeps must exceed burn_in");
  if (chains < 1) throw InvalidArgument("sampler: need at least one chain");
  if (thin < 1) throw InvalidArgument("sampler: thin must be positive");
}

double PiecewiseGaussian1D::log_segment_mass(std::size_t k) const {
  const double sd = 1.0 / std::sqrt(a);
  const double mu = b[k] / a;
  const double lo = k == 0 ? -kInf : breakpoints[k - 1];
  const double hi = k + 1 == segments() ? kInf : breakpoints[k];
  return b[k] * b[k] / (2.0 * a) - c[k] + std::log(sd * std::sqrt(2.0 * std::numbers::pi)) +
         special::log_normal_interval((lo - mu) / sd, (hi - mu) / sd);
}

double PiecewiseGaussian1D::log_density(double y) const {
  const std::size_t k =
      static_cast<std::size_t>(std::upper_bound(breakpoints.begin(), breakpoints.end(), y) - breakpoints.begin());
  return -(0.5 * a * y * y - b[k] * y + c[k]);
}

PiecewiseGaussian1D make_piecewise_gaussian(double x, double t, double eps, double lambda,
                                            std::vector<double> neighbours) {
  std::sort(neighbours.begin(), neighbours.end());
  PiecewiseGaussian1D pg;
  const std::size_t k = neighbours.size();
  pg.a = 1.0 / (t * eps);
  pg.b.resize(k + 1);
  pg.c.resize(k + 1);
  const double s = lambda / eps;
  double above_sum = 0.0;
  for (double v : neighbours) above_sum += v;
  double below_sum = 0.0;
  for (std::size_t seg = 0; seg <= k; ++seg) {
    const double n_below = static_cast<double>(seg);
    const double n_above = static_cast<double>(k - seg);
    pg.b[seg] = x * pg.a - s * (n_below - n_above);
    pg.c[seg] = s * (above_sum - below_sum);
    if (seg < k) {
      below_sum += neighbours[seg];
      above_sum -= neighbours[seg];
    }
  }
  pg.breakpoints = std::move(neighbours);
  return pg;
}

PiecewiseGaussian1D conditional_density(const Image& state, std::size_t index, const Image& x, double t,
                                        double eps, double lambda) {
  if (!state.same_shape(x)) throw InvalidArgument("conditional_density: state and data differ in size");
  if (index >= x.size()) throw InvalidArgument("conditional_density: pixel index out of range");
  if (!(t > 0.0) || !(eps > 0.0) || !(lambda >= 0.0))
    throw InvalidArgument("conditional_density: need t > 0, eps > 0, lambda >= 0");
  const std::size_t w = x.width, r = index / w, col = index % w;
  std::vector<double> nb;
  if (lambda > 0.0) {
    if (col > 0) nb.push_back(state.pixels[index - 1]);
    if (col + 1 < w) nb.push_back(state.pixels[index + 1]);
    if (r > 0) nb.push_back(state.pixels[index - w]);
    if (r + 1 < x.height) nb.push_back(state.pixels[index + w]);
  }
  return make_piecewise_gaussian(x.pixels[index], t, eps, lambda, std::move(nb));
}

namespace {

// log(Phi(hi) - Phi(lo)) with the cheap erfc forms away from the far tails.
double log_mass_standard(double lo, double hi) {
  if (lo >= 0.0) {
    if (lo > 20.0) return special::log_normal_interval(lo, hi);
    const double qhi = hi == kInf ? 0.0 : 0.5 * std::erfc(hi / kSqrt2);
    return std::log(0.5 * std::erfc(lo / kSqrt2) - qhi);
  }
  if (hi <= 0.0) return log_mass_standard(-hi, -lo);
  const double plo = lo == -kInf ? 0.0 : normal_cdf(lo);
  const double phi = hi == kInf ? 1.0 : normal_cdf(hi);
  return std::log(phi - plo);
}

// Standard normal restricted to [lo, hi] with lo >= 0: exponential proposals with the
// optimal rate, truncated to the interval, accepted with probability exp(-(z - rate)^2 / 2).
double tail_rejection(double lo, double hi, Rng& rng) {
  const double rate = 0.5 * (lo + std::sqrt(lo * lo + 4.0));
  const double span = hi == kInf ? 1.0 : -std::expm1(-rate * (hi - lo));
  for (;;) {
    const double z = lo - std::log1p(-rng.uniform() * span) / rate;
    const double d = z - rate;
    if (z <= hi && rng.uniform() <= std::exp(-0.5 * d * d)) return z;
  }
}

// Standard normal restricted to [lo, hi]; mass is the probability of the interval.
// Every branch is an exact sampler; inversion covers what the cheap ones do not.
double truncated_standard(double lo, double hi, double mass, Rng& rng) {
  if (mass > 0.3) {
    for (;;) {
      const double z = rng.normal();
      if (z >= lo && z <= hi) return z;
    }
  }
  if (lo >= 0.0) return tail_rejection(lo, hi, rng);
  if (hi <= 0.0) return -tail_rejection(-hi, -lo, rng);
  // Straddles 0 with little mass, so the interval is short: uniform proposals.
  const double spread = 0.5 * std::max(lo * lo, hi * hi);
  if (spread <= 1.0) {
    for (;;) {
      const double z = lo + (hi - lo) * rng.uniform();
      if (rng.uniform() <= std::exp(-0.5 * z * z)) return z;
    }
  }
  return truncated_normal_inverse(lo, hi, rng.uniform());
}

double sample_segment(double mu, double sd, double lo, double hi, double mass, Rng& rng) {
  const double z = truncated_standard((lo - mu) / sd, (hi - mu) / sd, mass, rng);
  return std::clamp(mu + sd * z, lo, hi);
}

// Segment choice by mass followed by an exact draw inside the segment.
double sample_core(const double* bp, std::size_t k, double a, const double* b, const double* c, Rng& rng) {
  const std::size_t m = k + 1;
  double small[2][8];
  std::vector<double> big;
  double* lmass = small[0];
  double* std_mass = small[1];
  if (m > 8) {
    big.resize(2 * m);
    lmass = big.data();
    std_mass = big.data() + m;
  }
  const double sd = 1.0 / std::sqrt(a);
  double top = -kInf;
  for (std::size_t s = 0; s < m; ++s) {
    const double mu = b[s] / a;
    const double lo = s == 0 ? -kInf : (bp[s - 1] - mu) / sd;
    const double hi = s + 1 == m ? kInf : (bp[s] - mu) / sd;
    const double lm = lo < hi ? log_mass_standard(lo, hi) : -kInf;
    std_mass[s] = lm;
    lmass[s] = 0.5 * b[s] * mu - c[s] + lm;
    top = std::max(top, lmass[s]);
  }
  if (!std::isfinite(top)) throw NumericalError("piecewise Gaussian: total mass underflow");
  double total = 0.0;
  for (std::size_t s = 0; s < m; ++s) {
    lmass[s] = std::exp(lmass[s] - top);
    total += lmass[s];
  }
  double u = rng.uniform() * total;
  std::size_t seg = 0;
  for (; seg + 1 < m; ++seg) {
    if (u < lmass[seg]) break;
    u -= lmass[seg];
  }
  // Skip empty (zero-width) segments that the roundoff above may still pick.
  while (lmass[seg] == 0.0 && seg > 0) --seg;
  const double lo = seg == 0 ? -kInf : bp[seg - 1];
  const double hi = seg + 1 == m ? kInf : bp[seg];
  return sample_segment(b[seg] / a, sd, lo, hi, std::exp(std_mass[seg]), rng);
}

}  // namespace

double sample_piecewise_gaussian(const PiecewiseGaussian1D& pg, Rng& rng) {
  if (pg.segments() == 0 || pg.breakpoints.size() + 1 != pg.segments() || pg.c.size() != pg.segments() ||
      !(pg.a > 0.0))
    throw InvalidArgument("piecewise Gaussian: inconsistent description");
  return sample_core(pg.breakpoints.data(), pg.breakpoints.size(), pg.a, pg.b.data(), pg.c.data(), rng);
}

namespace {

struct Welford {
  std::vector<double> mean, m2;
  long long count = 0;
  explicit Welford(std::size_t n = 0) : mean(n, 0.0), m2(n, 0.0) {}
  void add(const std::vector<double>& v) {
    ++count;
    const double inv = 1.0 / static_cast<double>(count);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double d = v[i] - mean[i];
      mean[i] += d * inv;
      m2[i] += d * (v[i] - mean[i]);
    }
  }
};

struct ChainStats {
  Welford halves[2];
  std::vector<std::vector<double>> batch_sums;  // per batch, per pixel
  std::vector<long long> batch_counts;
};

ChainStats run_chain(const Image& x, double t, double eps, double lambda, const SamplerConfig& cfg,
                     std::uint64_t seed) {
  const std::size_t n = x.size();
  Rng rng(seed);
  Image state = x;
  const long long recorded = (cfg.sweeps - cfg.burn_in + cfg.thin - 1) / cfg.thin;
  const long long half = recorded / 2;
  const int batches = static_cast<int>(std::min<long long>(kBatches, std::max<long long>(1, recorded / 2)));
  const long long per_batch = std::max<long long>(1, recorded / batches);

  ChainStats st{{Welford(n), Welford(n)}, std::vector<std::vector<double>>(batches, std::vector<double>(n, 0.0)),
                std::vector<long long>(batches, 0)};
  const std::size_t w = x.width, h = x.height;
  const double a = 1.0 / (t * eps), slope = lambda / eps;
  double nb[4], bb[5], cc[5];
  long long rec = 0;
  for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t col = 0; col < w; ++col) {
        const std::size_t i = r * w + col;
        std::size_t k = 0;
        if (lambda > 0.0) {
          if (col > 0) nb[k++] = state.pixels[i - 1];
          if (col + 1 < w) nb[k++] = state.pixels[i + 1];
          if (r > 0) nb[k++] = state.pixels[i - w];
          if (r + 1 < h) nb[k++] = state.pixels[i + w];
        }
        std::sort(nb, nb + k);
        // Same coefficients as make_piecewise_gaussian, without allocation.
        double above = 0.0;
        for (std::size_t j = 0; j < k; ++j) above += nb[j];
        double below = 0.0;
        for (std::size_t s = 0; s <= k; ++s) {
          bb[s] = x.pixels[i] * a - slope * (2.0 * static_cast<double>(s) - static_cast<double>(k));
          cc[s] = slope * (above - below);
          if (s < k) {
            below += nb[s];
            above -= nb[s];
          }
        }
        state.pixels[i] = sample_core(nb, k, a, bb, cc, rng);
      }
    }
    if (sweep < cfg.burn_in || (sweep - cfg.burn_in) % cfg.thin != 0) continue;
    st.halves[rec < half ? 0 : 1].add(state.pixels);
    const int bi = static_cast<int>(std::min<long long>(rec / per_batch, batches - 1));
    for (std::size_t i = 0; i < n; ++i) st.batch_sums[bi][i] += state.pixels[i];
    ++st.batch_counts[bi];
    ++rec;
  }
  return st;
}

}  // namespace

McmcResult posterior_mean_mcmc(const Image& x, double t, double eps, double lambda, const SamplerConfig& cfg) {
  cfg.validate();
  if (!(t > 0.0)) throw InvalidArgument("posterior_mean_mcmc: t must be positive");
  if (!(eps > 0.0)) throw InvalidArgument("posterior_mean_mcmc: eps must be positive (eps = 0 is the MAP estimate)");
  if (!(lambda >= 0.0)) throw InvalidArgument("posterior_mean_mcmc: lambda must be nonnegative");
  if (x.size() == 0) throw InvalidArgument("posterior_mean_mcmc: empty image");

  const std::size_t n = x.size();
  const std::size_t chains = static_cast<std::size_t>(cfg.chains);
  std::vector<ChainStats> stats(chains);
  parallel_for(chains, [&](std::size_t c) { stats[c] = run_chain(x, t, eps, lambda, cfg, cfg.seed + c); });

  McmcResult res;
  res.mean_image = Image(x.width, x.height);
  res.stderr_image = Image(x.width, x.height);
  res.variance_image = Image(x.width, x.height);
  long long total = 0;
  for (const ChainStats& s : stats) total += s.halves[0].count + s.halves[1].count;
  res.accepted_sweeps = total;

  // Split-chain R-hat over the 2C half-chains (equal length up to one sample).
  res.rhat_max = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double grand = 0.0, within = 0.0, between = 0.0, pooled_m2 = 0.0;
    std::size_t seqs = 0;
    double len = 0.0;
    for (const ChainStats& s : stats) {
      for (const Welford& wf : s.halves) {
        if (wf.count == 0) continue;
        grand += wf.mean[i] * static_cast<double>(wf.count);
        ++seqs;
        len += static_cast<double>(wf.count);
      }
    }
    grand /= static_cast<double>(total);
    len /= static_cast<double>(seqs);
    for (const ChainStats& s : stats) {
      for (const Welford& wf : s.halves) {
        if (wf.count == 0) continue;
        const double d = wf.mean[i] - grand;
        between += d * d;
        within += wf.count > 1 ? wf.m2[i] / static_cast<double>(wf.count - 1) : 0.0;
        pooled_m2 += wf.m2[i] + static_cast<double>(wf.count) * d * d;
      }
    }
    res.mean_image.pixels[i] = grand;
    res.variance_image.pixels[i] = total > 1 ? pooled_m2 / static_cast<double>(total - 1) : 0.0;
    within /= static_cast<double>(seqs);
    between /= static_cast<double>(seqs - 1 > 0 ? seqs - 1 : 1);  // B / L
    if (within > 0.0 && seqs > 1) {
      const double var_plus = (len - 1.0) / len * within + between;
      res.rhat_max = std::max(res.rhat_max, std::sqrt(var_plus / within));
    }
  }

  // Batch means across all chains.
  std::size_t nb = 0;
  for (const ChainStats& s : stats)
    for (long long c : s.batch_counts) nb += c > 0;
  for (std::size_t i = 0; i < n; ++i) {
    double ss = 0.0;
    for (const ChainStats& s : stats) {
      for (std::size_t b = 0; b < s.batch_counts.size(); ++b) {
        if (s.batch_counts[b] == 0) continue;
        const double d = s.batch_sums[b][i] / static_cast<double>(s.batch_counts[b]) - res.mean_image.pixels[i];
        ss += d * d;
      }
    }
    res.stderr_image.pixels[i] = nb > 1 ? std::sqrt(ss / static_cast<double>(nb - 1) / static_cast<double>(nb)) : 0.0;
  }
  res.converged = res.rhat_max <= 1.1;
  return res;
}

}  // namespace hjbd
