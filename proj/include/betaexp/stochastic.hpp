#pragma once

// Sampling and quadrature checks of the probabilistic statements: the law of
// the scaled remainder beta*X - floor(beta*X), decay of correlations of
// g(T^k x) under the invariant measure, and ergodic averages.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "betaexp/expansion.hpp"
#include "betaexp/layers.hpp"

namespace betaexp {

/// Counter-based generator: draw i is splitmix64(seed + (i+1) * golden gamma).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t bits(std::uint64_t counter) const { return mix(seed_ + (counter + 1) * 0x9E3779B97F4A7C15ULL); }
  /// Uniform double in [0,1) with 53 random bits.
  double uniform(std::uint64_t counter) const { return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

struct SampleBatch {
  std::uint64_t seed = 0;
  std::size_t count = 0;
  std::vector<double> draws;
};

namespace detail {

inline void require_pdf(const FloatPC& f) {
  double mass = 0;
  for (std::size_t i = 0; i < f.cells(); ++i) {
    if (f.values()[i] < 0) throw domain_error("density must be nonnegative");
    mass += f.values()[i] * f.width(i);
  }
  if (std::fabs(mass - 1) > 1e-12) throw domain_error("density must integrate to 1");
}

// Cumulative masses C_0 = 0, ..., C_m = 1 of a piecewise-constant density.
inline std::vector<double> cumulative(const FloatPC& f) {
  std::vector<double> c{0.0};
  for (std::size_t i = 0; i < f.cells(); ++i) c.push_back(c.back() + f.values()[i] * f.width(i));
  return c;
}

inline double cdf_at(const FloatPC& f, const std::vector<double>& c, double x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  const std::size_t i = static_cast<std::size_t>(
      std::upper_bound(f.breakpoints().begin() + 1, f.breakpoints().end() - 1, x) - f.breakpoints().begin() - 1);
  return c[i] + f.values()[i] * (x - f.breakpoints()[i]);
}

}  // namespace detail

/// Inverse-CDF sampler for a piecewise-constant density.
class DensitySampler {
 public:
  explicit DensitySampler(FloatPC f) : f_(std::move(f)) {
    detail::require_pdf(f_);
    cum_ = detail::cumulative(f_);
  }

  double operator()(double u) const {
    const double target = u * cum_.back();
    auto it = std::upper_bound(cum_.begin() + 1, cum_.end() - 1, target);
    std::size_t i = static_cast<std::size_t>(it - cum_.begin() - 1);
    while (f_.values()[i] == 0 && i + 1 < f_.cells()) ++i;  // zero cells carry no mass
    const double x = f_.breakpoints()[i] + (target - cum_[i]) / f_.values()[i];
    return std::clamp(x, f_.breakpoints()[i], std::nextafter(f_.breakpoints()[i + 1], 0.0));
  }

  double cdf(double x) const { return detail::cdf_at(f_, cum_, x); }
  const FloatPC& density() const noexcept { return f_; }

 private:
  FloatPC f_;
  std::vector<double> cum_;
};

inline SampleBatch sample_density(const FloatPC& f, std::uint64_t seed, std::size_t count) {
  DensitySampler s(f);
  CounterRng rng(seed);
  SampleBatch b{seed, count, {}};
  b.draws.reserve(count);
  for (std::size_t i = 0; i < count; ++i) b.draws.push_back(s(rng.uniform(i)));
  return b;
}

inline SampleBatch sample_density(const ExactPC& f, std::uint64_t seed, std::size_t count) {
  if (!(integrate(f) == AlgNum(f.context(), 1L))) throw domain_error("density must integrate to 1");
  for (const auto& v : f.values())
    if (v.sign() < 0) throw domain_error("density must be nonnegative");
  return sample_density(to_float(f), seed, count);
}

/// Kolmogorov-Smirnov statistic sup |F_n - F| of the draws against a CDF.
inline double ks_statistic(std::vector<double> draws, const std::function<double(double)>& cdf) {
  if (draws.empty()) return 0;
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double d = 0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double F = cdf(draws[i]);
    d = std::max({d, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
  }
  return d;
}

/// Critical value at the 1% level.
inline double ks_threshold(std::size_t count) { return 1.63 / std::sqrt(static_cast<double>(count)); }

struct RemainderPdfReport {
  std::uint64_t seed = 0;
  std::size_t count = 0;
  std::vector<double> edges;
  std::vector<std::size_t> observed;
  std::vector<double> expected;  // count * mass of P f on the bin
  std::vector<double> z_scores;
  double fraction_within = 0;    // bins with |z| <= 4
  double support_lo = 1, support_hi = 0;
  bool passed() const { return fraction_within >= 0.99; }
};

/// Draws X ~ f, forms beta*X - floor(beta*X) and histograms it against the
/// exact transfer P f.
inline RemainderPdfReport remainder_pdf_check(const ExactPC& f, std::uint64_t seed, std::size_t count, std::size_t bins) {
  if (bins < 1) throw domain_error("remainder_pdf_check: need at least one bin");
  const auto& ctx = f.context();
  const auto batch = sample_density(f, seed, count);
  const FloatPC pf = to_float(transfer_apply(f));
  const auto cum = detail::cumulative(pf);
  RemainderPdfReport r;
  r.seed = seed;
  r.count = count;
  r.observed.assign(bins, 0);
  for (std::size_t b = 0; b <= bins; ++b) r.edges.push_back(static_cast<double>(b) / static_cast<double>(bins));
  for (double x : batch.draws) {
    const double y = t_beta(ctx, x);
    r.support_lo = std::min(r.support_lo, y);
    r.support_hi = std::max(r.support_hi, y);
    r.observed[std::min(bins - 1, static_cast<std::size_t>(y * static_cast<double>(bins)))]++;
  }
  std::size_t ok = 0;
  const double n = static_cast<double>(count);
  for (std::size_t b = 0; b < bins; ++b) {
    const double p = std::clamp(detail::cdf_at(pf, cum, r.edges[b + 1]) - detail::cdf_at(pf, cum, r.edges[b]), 0.0, 1.0);
    r.expected.push_back(n * p);
    const double se = std::sqrt(n * p * (1 - p));
    const double dev = static_cast<double>(r.observed[b]) - n * p;
    const double z = se > 0 ? dev / se : (std::fabs(dev) < 1e-6 ? 0.0 : INFINITY);
    r.z_scores.push_back(z);
    if (std::fabs(z) <= 4) ++ok;
  }
  r.fraction_within = static_cast<double>(ok) / static_cast<double>(bins);
  return r;
}

struct CorrelationLag {
  int lag;
  AlgNum covariance;
  double bound;
};

struct CorrelationReport {
  AlgNum mean;           // integral of u1 g
  double sup_centered = 0;  // ||g - mean||_inf
  double lipschitz = 0;     // zero for piecewise-constant g
  double K1_fitted = 0, K2 = 0, lambda2_mod = 0;
  std::vector<CorrelationLag> lags;
  std::string method = "exact-quadrature";
  bool within_bound() const {
    for (const auto& l : lags)
      if (std::fabs(l.covariance.to_double()) > l.bound * (1 + 1e-12)) return false;
    return true;
  }
};

/// cov(l) = integral of P^l(u1 g0) g0 with g0 = g - integral(u1 g), exactly.
/// The envelope K1 (L_g + ||g0||_inf) beta^{-K2 l} takes K1 from the L1 decay
/// of P^l(u1 g0), which bounds |cov(l)| by ||P^l(u1 g0)||_1 ||g0||_inf.
inline CorrelationReport correlation_exact(const ExactPC& g, int max_lag) {
  if (max_lag < 0) throw domain_error("correlation_exact: max_lag must be >= 0");
  const auto& ctx = g.context();
  const auto u1 = invariant_density(ctx).u1;
  CorrelationReport rep{integrate(multiply(u1, g)), 0, 0, 0, 0, 0, {}, "exact-quadrature"};
  const ExactPC g0 = g - ExactPC::constant(ctx, rep.mean);
  for (const auto& v : g0.values()) rep.sup_centered = std::max(rep.sup_centered, std::fabs(v.to_double()));
  ExactPC h = multiply(u1, g0);
  const auto decay = iterate_transfer(h, max_lag, AlgNum(ctx, 0L));
  rep.K1_fitted = decay.K1_fitted;
  rep.K2 = decay.K2;
  rep.lambda2_mod = decay.lambda2_mod;
  const double beta = ctx->beta_float();
  for (int l = 0; l <= max_lag; ++l) {
    rep.lags.push_back({l, integrate(multiply(h, g0)),
                        rep.K1_fitted * (rep.lipschitz + rep.sup_centered) * std::pow(beta, -rep.K2 * l)});
    if (l < max_lag) h = transfer_apply(h);
  }
  return rep;
}

/// E(X_k X_m) = integral of u1 (K^k g)(K^m g), computed through the Koopman
/// operator (independent of the transfer-operator path).
inline AlgNum joint_moment(const ExactPC& g, int k, int m) {
  const auto u1 = invariant_density(g.context()).u1;
  ExactPC a = g, b = g;
  for (int i = 0; i < k; ++i) a = koopman_apply(a);
  for (int i = 0; i < m; ++i) b = koopman_apply(b);
  return integrate(multiply(u1, multiply(a, b)));
}

/// E(X_k) = integral of (P^k u1) g; equals integral of u1 g for every k.
inline AlgNum stationary_mean(const ExactPC& g, int k) {
  const auto u1 = invariant_density(g.context()).u1;
  return integrate(multiply(transfer_power(u1, k), g));
}

/// Exact integral of x u1(x) dx.
inline AlgNum first_moment(const ExactPC& u) {
  AlgNum acc(u.context(), 0L);
  for (std::size_t i = 0; i < u.cells(); ++i) {
    const auto& a = u.breakpoints()[i];
    const auto& b = u.breakpoints()[i + 1];
    acc += u.values()[i] * (b * b - a * a) / mpq_class(2);
  }
  return acc;
}

struct ErgodicReport {
  std::uint64_t seed = 0;
  std::size_t starts = 0;
  int N = 0;
  double mean = 0;      // exact M
  double bias = 0;      // average of A_N - M over starts
  double variance = 0;  // sample variance of A_N - M
  double var_times_N() const { return variance * N; }
};

/// A_N(x) = N^{-1} sum_{k<N} g(T^k x) over `starts` starting points drawn from u1.
/// Starts are split across `threads` workers; the reduction runs in start
/// order, so the report does not depend on the thread count.
inline ErgodicReport ergodic_average(const ContextPtr& ctx, const std::function<double(double)>& g, double mean,
                                     std::uint64_t seed, std::size_t starts, int N, unsigned threads = 1) {
  if (N < 1) throw domain_error("ergodic_average: N must be >= 1");
  DensitySampler s(to_float(invariant_density(ctx).u1));
  CounterRng rng(seed);
  ErgodicReport r{seed, starts, N, mean};
  std::vector<double> dev(starts);
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      double x = s(rng.uniform(i));
      double acc = 0;
      for (int k = 0; k < N; ++k) {
        acc += g(x);
        x = t_beta(ctx, x);
      }
      dev[i] = acc / N - mean;
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, starts))));
  if (threads == 1) {
    work(0, starts);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back(work, starts * t / threads, starts * (t + 1) / threads);
    for (auto& th : pool) th.join();
  }
  double sum = 0;
  for (double d : dev) sum += d;
  r.bias = starts ? sum / static_cast<double>(starts) : 0;
  double ss = 0;
  for (double d : dev) ss += (d - r.bias) * (d - r.bias);
  r.variance = starts > 1 ? ss / static_cast<double>(starts - 1) : 0;
  return r;
}

struct PeriodicOrbit {
  std::vector<AlgNum> points;  // one period, starting at the first repeated point
  std::size_t preperiod = 0;
};

/// The exact T-orbit of x, which is eventually periodic for x in Q(beta).
inline PeriodicOrbit exact_cycle(const AlgNum& x, std::size_t budget = 100000) {
  std::map<std::string, std::size_t> seen;
  std::vector<AlgNum> pts;
  AlgNum r = x;
  for (std::size_t k = 0; k <= budget; ++k) {
    auto [it, fresh] = seen.emplace(detail::coeff_key(r), k);
    if (!fresh) return {std::vector<AlgNum>(pts.begin() + static_cast<std::ptrdiff_t>(it->second), pts.end()), it->second};
    pts.push_back(r);
    r = t_beta(r);
  }
  throw resource_error("exact_cycle: period exceeds budget");
}

/// Number of steps for which the float orbit of x stays within tol of the
/// exact orbit (capped at max_steps).
inline int shadowing_horizon(const AlgNum& x, double tol, int max_steps) {
  const ContextPtr ctx = x.context().ptr();
  AlgNum e = x;
  double f = x.to_double();
  for (int k = 0; k < max_steps; ++k) {
    if (std::fabs(e.to_double() - f) > tol) return k;
    e = t_beta(e);
    f = t_beta(ctx, f);
  }
  return max_steps;
}

/// Steps before an initial error of one ulp grows past tol: log(tol/eps)/log(beta).
inline int predicted_shadowing_horizon(const BetaContext& ctx, double tol) {
  return static_cast<int>(std::floor(std::log(tol / std::numeric_limits<double>::epsilon()) / std::log(ctx.beta_float())));
}

}  // namespace betaexp
