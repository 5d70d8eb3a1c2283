#pragma once

// Layer partition of [0,1], the normalized indicator basis F, the matrix of
// the transfer operator on span{F_0, ..., F_{n-1}}, the invariant density,
// spectral data and the decay harness for iterates of the transfer operator.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <type_traits>
#include <vector>

#include "betaexp/pcfun.hpp"

namespace betaexp {

/// Multi-index (k_1..k_m ; j_1..j_m) of a layer point or layer interval.
struct LayerIndex {
  std::vector<int> k, j;

  std::size_t depth() const noexcept { return k.size(); }
  /// m + k_1 + ... + k_m; the interval has width beta^{-weight}.
  int weight() const { return static_cast<int>(k.size()) + std::accumulate(k.begin(), k.end(), 0); }
  friend bool operator==(const LayerIndex&, const LayerIndex&) = default;
};

namespace detail {

inline void check_index(const BetaContext& ctx, const LayerIndex& idx, int j_max) {
  if (idx.k.empty() || idx.k.size() != idx.j.size()) throw domain_error("LayerIndex: chains must be nonempty and of equal length");
  for (std::size_t i = 0; i < idx.k.size(); ++i) {
    if (idx.k[i] < 0 || idx.k[i] >= ctx.n()) throw domain_error("LayerIndex: k out of range");
    if (idx.j[i] < 0 || idx.j[i] > j_max) throw domain_error("LayerIndex: j out of range");
  }
}

// t_k^{(j)} = q/beta + ... + q/beta^k + j/beta^{k+1}
inline AlgNum first_layer_point(const ContextPtr& ctx, int k, int j) {
  AlgNum acc(ctx, static_cast<long>(j));
  for (int i = 0; i < k; ++i) acc = acc.div_beta() + static_cast<long>(ctx->q());
  return acc.div_beta();
}

}  // namespace detail

/// t_{k_1..k_m}^{(j_1..j_m)}; j ranges over {0..q} so that right endpoints
/// are addressable.
inline AlgNum layer_point(const ContextPtr& ctx, const LayerIndex& idx) {
  detail::check_index(*ctx, idx, ctx->q());
  AlgNum acc(ctx, 0L), scale(ctx, 1L);
  for (std::size_t i = 0; i < idx.k.size(); ++i) {
    acc += scale * detail::first_layer_point(ctx, idx.k[i], idx.j[i]);
    scale = scale * AlgNum::beta_pow(ctx, -(idx.k[i] + 1));
  }
  return acc;
}

/// Red points t_0 = 0 < t_1 < ... < t_n = 1.
inline std::vector<AlgNum> red_points(const ContextPtr& ctx) {
  std::vector<AlgNum> t{AlgNum(ctx, 0L)};
  for (int r = 1; r <= ctx->n(); ++r) t.push_back(t.back() + AlgNum::beta_pow(ctx, -r) * static_cast<long>(ctx->q()));
  t.back() = AlgNum(ctx, 1L);
  return t;
}

/// beta^{weight} on [t(idx), t(idx with j_m + 1)): L1-normalized indicator.
inline ExactPC basis_fn(const ContextPtr& ctx, const LayerIndex& idx) {
  detail::check_index(*ctx, idx, ctx->q() - 1);
  const AlgNum a = layer_point(ctx, idx);
  const AlgNum b = a + AlgNum::beta_pow(ctx, -idx.weight());
  return ExactPC::indicator(ctx, a, b, AlgNum::beta_pow(ctx, idx.weight()));
}

/// F_r = q^{-1} beta^{r+1} chi_{[t_r, t_{r+1})}.
inline ExactPC red_basis(const ContextPtr& ctx, int r) {
  if (r < 0 || r >= ctx->n()) throw domain_error("red_basis: r out of range");
  const auto t = red_points(ctx);
  return ExactPC::indicator(ctx, t[static_cast<std::size_t>(r)], t[static_cast<std::size_t>(r + 1)],
                            AlgNum::beta_pow(ctx, r + 1) / mpq_class(ctx->q()));
}

/// Coordinates of f in the basis F_0..F_{n-1}, or nullopt if f is not in
/// the span (i.e. not constant on each red interval).
inline std::optional<std::vector<AlgNum>> red_coordinates(const ExactPC& f) {
  const auto& ctx = f.context();
  const auto t = red_points(ctx);
  std::vector<AlgNum> coords;
  for (int r = 0; r < ctx->n(); ++r) {
    const auto& a = t[static_cast<std::size_t>(r)];
    const auto& b = t[static_cast<std::size_t>(r + 1)];
    // every breakpoint strictly inside (a,b) breaks membership
    for (const auto& br : f.breakpoints())
      if (compare(br, a) > 0 && compare(br, b) < 0) return std::nullopt;
    const AlgNum v = f.eval(a);
    coords.push_back(v * AlgNum::beta_pow(ctx, -(r + 1)) * static_cast<long>(ctx->q()));
  }
  return coords;
}

struct BasisActionReport {
  LayerIndex index;
  bool one_step_ok = false;        // erase (k_1 = 0) or decrement (k_1 >= 1)
  int landing_exponent = 0;        // m - 1 + k_1 + ... + k_{m-1}
  bool lands_in_span = false;      // P^{landing_exponent} F in span{F_r}
  int all_k_exponent = 0;          // m - 1 + k_1 + ... + k_m
  bool lands_all_k = false;
  int first_landing = -1;          // smallest exponent reaching the span
  bool landed_nonnegative_unit = false;  // the landed function is >= 0 with integral 1
  bool ok() const { return one_step_ok && lands_in_span && lands_all_k && landed_nonnegative_unit; }
};

/// Verifies the one-step rule and where iterates of F_idx reach span{F_r}.
inline BasisActionReport basis_action_check(const ContextPtr& ctx, const LayerIndex& idx) {
  BasisActionReport rep;
  rep.index = idx;
  const auto F = basis_fn(ctx, idx);
  const auto PF = transfer_apply(F);
  if (idx.k[0] == 0) {
    if (idx.depth() == 1)
      rep.one_step_ok = PF == ExactPC::constant(ctx, AlgNum(ctx, 1L));
    else
      rep.one_step_ok = PF == basis_fn(ctx, LayerIndex{{idx.k.begin() + 1, idx.k.end()}, {idx.j.begin() + 1, idx.j.end()}});
  } else {
    LayerIndex dec = idx;
    --dec.k[0];
    rep.one_step_ok = PF == basis_fn(ctx, dec);
  }
  const int m = static_cast<int>(idx.depth());
  rep.landing_exponent = m - 1 + std::accumulate(idx.k.begin(), idx.k.end() - 1, 0);
  rep.all_k_exponent = m - 1 + std::accumulate(idx.k.begin(), idx.k.end(), 0);
  ExactPC g = F;
  const int horizon = rep.all_k_exponent + ctx->n() + 1;
  for (int e = 0; e <= horizon; ++e) {
    const bool in_span = red_coordinates(g).has_value();
    if (in_span && rep.first_landing < 0) rep.first_landing = e;
    if (e == rep.landing_exponent) rep.lands_in_span = in_span;
    if (e == rep.all_k_exponent) {
      rep.lands_all_k = in_span;
      bool nonneg = true;
      for (const auto& v : g.values()) nonneg = nonneg && v.sign() >= 0;
      rep.landed_nonnegative_unit = nonneg && integrate(g) == AlgNum(ctx, 1L);
    }
    if (e < horizon) g = transfer_apply(g);
  }
  return rep;
}

/// All multi-indices with interval index j <= q-1 and depth <= max_depth.
inline std::vector<LayerIndex> enumerate_indices(const BetaContext& ctx, int max_depth) {
  std::vector<LayerIndex> out, frontier{LayerIndex{}};
  for (int d = 1; d <= max_depth; ++d) {
    std::vector<LayerIndex> next;
    for (const auto& p : frontier)
      for (int k = 0; k < ctx.n(); ++k)
        for (int j = 0; j < ctx.q(); ++j) {
          LayerIndex c = p;
          c.k.push_back(k);
          c.j.push_back(j);
          next.push_back(c);
        }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

/// Matrix of P on span{F_0..F_{n-1}}: column c holds P F_c in the F basis.
struct TransferMatrix {
  std::vector<std::vector<AlgNum>> entries;  // entries[row][col]
  std::size_t size() const { return entries.size(); }
};

inline TransferMatrix transfer_matrix(const ContextPtr& ctx) {
  const int n = ctx->n();
  TransferMatrix T;
  T.entries.assign(static_cast<std::size_t>(n), std::vector<AlgNum>(static_cast<std::size_t>(n), AlgNum(ctx, 0L)));
  for (int i = 0; i < n; ++i) {
    T.entries[static_cast<std::size_t>(i)][0] = AlgNum::beta_pow(ctx, -(i + 1)) * static_cast<long>(ctx->q());
    if (i + 1 < n) T.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(i + 1)] = AlgNum(ctx, 1L);
  }
  return T;
}

struct SpectralData {
  std::vector<std::complex<long double>> eigenvalues;  // lambda_1 = 1 first, then by decreasing modulus
  double lambda2_mod = 0;
  double window_lo = 0, window_hi = 0;  // q^{1/(n-1)} beta^{-n/(n-1)}, 1/beta
  bool window_ok = false;
  double K2 = 0;
  double det_identity_residual = 0;
  bool column_sums_one = false;
};

namespace detail {

inline std::complex<long double> det(std::vector<std::vector<std::complex<long double>>> a) {
  const std::size_t n = a.size();
  std::complex<long double> d = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (a[piv][c] == std::complex<long double>(0)) return 0;
    if (piv != c) {
      std::swap(a[piv], a[c]);
      d = -d;
    }
    d *= a[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const auto f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return d;
}

}  // namespace detail

/// Decay exponent K2 = a / (a + ln beta) with a = -ln|lambda_2|; for n = 2
/// this equals (2 - ln q/ln beta) / (3 - ln q/ln beta).
inline double decay_exponent(double lambda2_mod, double beta) {
  const double a = -std::log(lambda2_mod);
  return a / (a + std::log(beta));
}

inline SpectralData spectral_data(const ContextPtr& ctx, double tol = 1e-12, std::uint64_t seed = 0x5eed) {
  const int n = ctx->n(), q = ctx->q();
  SpectralData sd;
  const auto rep = all_roots(*ctx, tol);
  const long double beta = ctx->beta_float();
  sd.eigenvalues.push_back(rep.beta_root.value / beta);
  for (const auto& r : rep.other_roots) sd.eigenvalues.push_back(r.value / beta);
  sd.lambda2_mod = static_cast<double>(std::abs(sd.eigenvalues[1]));
  sd.window_lo = std::pow(static_cast<double>(q), 1.0 / (n - 1)) * std::pow(ctx->beta_float(), -static_cast<double>(n) / (n - 1));
  sd.window_hi = 1.0 / ctx->beta_float();
  sd.window_ok = sd.window_lo <= sd.lambda2_mod * (1 + 1e-12) && sd.lambda2_mod < sd.window_hi;
  sd.K2 = decay_exponent(sd.lambda2_mod, ctx->beta_float());

  const auto T = transfer_matrix(ctx);
  sd.column_sums_one = true;
  for (int c = 0; c < n; ++c) {
    AlgNum s(ctx, 0L);
    for (int r = 0; r < n; ++r) s += T.entries[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    sd.column_sums_one = sd.column_sums_one && s == AlgNum(ctx, 1L);
  }

  std::vector<std::vector<long double>> Tl(static_cast<std::size_t>(n), std::vector<long double>(static_cast<std::size_t>(n)));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      Tl[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
          std::stold(T.entries[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].to_decimal(25));
  const long double bl = std::stold(ctx->beta_decimal(25));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<long double> u(0, 1);
  for (int t = 0; t < 10; ++t) {
    const auto z = std::polar(std::sqrt(u(rng)), 2 * std::numbers::pi_v<long double> * u(rng));
    std::vector<std::vector<std::complex<long double>>> A(static_cast<std::size_t>(n),
                                                         std::vector<std::complex<long double>>(static_cast<std::size_t>(n)));
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        A[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
            (r == c ? z : std::complex<long double>(0)) - Tl[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    std::complex<long double> lhs = detail::det(A) * std::pow(bl, n);
    std::complex<long double> p = 1, w = z * bl;
    for (int i = 0; i < n; ++i) p = p * w - static_cast<long double>(q);
    sd.det_identity_residual = std::max(sd.det_identity_residual, static_cast<double>(std::abs(lhs - p)));
  }
  return sd;
}

struct InvariantDensity {
  ExactPC u1;
  std::vector<AlgNum> s;  // s_1 = 1, s_{k+1} = s_k - q beta^{-k}
  bool fixed_point = false;   // P u1 == u1 exactly
  bool unit_mass = false;     // integral == 1 exactly
  bool positive = false;
  bool adjoint_fixed = false;  // <P F_r, chi> == <F_r, chi> for all r, i.e. P* chi = chi on the span
};

inline InvariantDensity invariant_density(const ContextPtr& ctx) {
  const int n = ctx->n(), q = ctx->q();
  InvariantDensity d;
  d.s.push_back(AlgNum(ctx, 1L));
  for (int k = 1; k < n; ++k) d.s.push_back(d.s.back() - AlgNum::beta_pow(ctx, -k) * static_cast<long>(q));
  AlgNum total(ctx, 0L);
  for (const auto& x : d.s) total += x;
  const auto t = red_points(ctx);
  std::vector<AlgNum> vals;
  for (int r = 0; r < n; ++r)
    vals.push_back(d.s[static_cast<std::size_t>(r)] * AlgNum::beta_pow(ctx, r + 1) / mpq_class(q) / total);
  d.u1 = ExactPC(ctx, t, vals);
  d.fixed_point = transfer_apply(d.u1) == d.u1;
  d.unit_mass = integrate(d.u1) == AlgNum(ctx, 1L);
  d.positive = std::all_of(d.u1.values().begin(), d.u1.values().end(), [](const AlgNum& v) { return v.sign() > 0; });
  const auto chi = ExactPC::constant(ctx, AlgNum(ctx, 1L));
  d.adjoint_fixed = koopman_apply(chi) == chi;
  for (int r = 0; r < n; ++r) {
    const auto F = red_basis(ctx, r);
    d.adjoint_fixed = d.adjoint_fixed && inner_product(transfer_apply(F), chi) == inner_product(F, chi);
  }
  return d;
}

struct Leaf {
  LayerIndex index;
  int weight;
  AlgNum left;  // left endpoint; width beta^{-weight}
};

/// Refines every interval of weight w < M into its children (weights
/// w+1..w+n), so leaf weights lie in [M, M+n-1]. Leaves come out sorted.
inline std::vector<Leaf> partition_leaves(const ContextPtr& ctx, int M, std::size_t leaf_cap = 20000000) {
  const int n = ctx->n(), q = ctx->q();
  if (M < n + 1) throw domain_error("approx_partition: M must be >= n+1");
  std::vector<AlgNum> first;  // t_k^{(j)} for interval indices
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < q; ++j) first.push_back(detail::first_layer_point(ctx, k, j));
  std::vector<AlgNum> inv_pow{AlgNum(ctx, 1L)};
  std::vector<Leaf> out;
  std::function<void(LayerIndex&, int, const AlgNum&)> rec = [&](LayerIndex& idx, int w, const AlgNum& left) {
    if (w >= M && !idx.k.empty()) {
      if (out.size() >= leaf_cap) throw resource_error("approx_partition: leaf count exceeds cap");
      out.push_back({idx, w, left});
      return;
    }
    while (static_cast<int>(inv_pow.size()) <= w) inv_pow.push_back(inv_pow.back().div_beta());
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < q; ++j) {
        idx.k.push_back(k);
        idx.j.push_back(j);
        rec(idx, w + k + 1, left + inv_pow[static_cast<std::size_t>(w)] * first[static_cast<std::size_t>(k * q + j)]);
        idx.k.pop_back();
        idx.j.pop_back();
      }
  };
  LayerIndex root;
  rec(root, 0, AlgNum(ctx, 0L));
  return out;
}

inline std::vector<LayerIndex> approx_partition(const ContextPtr& ctx, int M, std::size_t leaf_cap = 20000000) {
  std::vector<LayerIndex> out;
  for (auto& l : partition_leaves(ctx, M, leaf_cap)) out.push_back(std::move(l.index));
  return out;
}

/// Samples f at the left endpoint of every leaf. f may return AlgNum (kept
/// exact) or double (stored as its exact rational value).
template <class Fn>
ExactPC approximate_lipschitz(const ContextPtr& ctx, Fn f, int M, std::size_t leaf_cap = 20000000) {
  const auto leaves = partition_leaves(ctx, M, leaf_cap);
  std::vector<AlgNum> br, vals;
  br.reserve(leaves.size() + 1);
  vals.reserve(leaves.size());
  for (const auto& l : leaves) {
    br.push_back(l.left);
    using R = std::invoke_result_t<Fn, const AlgNum&>;
    if constexpr (std::is_same_v<R, AlgNum>)
      vals.push_back(f(l.left));
    else
      vals.emplace_back(ctx, mpq_class(static_cast<double>(f(l.left))));
  }
  br.emplace_back(ctx, 1L);
  return ExactPC(ctx, std::move(br), std::move(vals));
}

/// Float-mode variant: breakpoints and samples in double.
inline FloatPC approximate_lipschitz_float(const ContextPtr& ctx, const std::function<double(double)>& f, int M,
                                           std::size_t leaf_cap = 20000000) {
  const auto leaves = partition_leaves(ctx, M, leaf_cap);
  std::vector<double> br, vals;
  for (const auto& l : leaves) {
    br.push_back(l.left.to_double());
    vals.push_back(f(br.back()));
  }
  br.front() = 0;
  br.push_back(1);
  return FloatPC(ctx, std::move(br), std::move(vals));
}

struct DecayReport {
  std::vector<std::pair<int, double>> errors;  // (N, ||P^N f - u1 * ref||_1)
  double fitted_rate = std::numeric_limits<double>::quiet_NaN();  // slope of ln e_N over the fit range
  int fit_begin = 1, fit_end = 1;  // fit range [begin, end)
  double K1_fitted = 0;
  double K2 = 0;
  double lambda2_mod = 0;
  double floor = 0;          // |integral f - ref|, the level e_N tends to
  double plateau_level = 0;  // e at N_max
  std::string mode = "exact";
  int fallback_at = -1;  // first N computed with 256-bit values, -1 if none
  std::size_t max_value_bits = 0;
};

namespace detail {

template <class V>
double l1_distance(const PiecewiseConstant<AlgNum, V>& f, const ExactPC& u1, const V& ref) {
  auto target = map_values(u1, [&](const AlgNum& v) { return V(convert<V>(v) * ref); });
  auto diff = f - target;
  if constexpr (std::is_same_v<V, AlgNum>) {
    return norm1_exact(diff).to_double();
  } else {
    V acc = 0;
    for (std::size_t i = 0; i < diff.cells(); ++i) acc += abs(diff.values()[i]) * convert<V>(diff.width(i));
    return convert<double>(acc);
  }
}

inline std::size_t value_bits(const ExactPC& f) {
  std::size_t b = 0;
  for (const auto& v : f.values()) b = std::max(b, v.max_bits());
  return b;
}

}  // namespace detail

/// e_N = ||P^N f - u1 * ref||_1 for N = 0..N_max, exact while the value
/// coefficients stay under bit_cap bits, then with 256-bit float values.
inline DecayReport iterate_transfer(const ExactPC& f, int N_max, const std::optional<AlgNum>& reference_mass = std::nullopt,
                                    std::size_t bit_cap = 10000) {
  const auto& ctx = f.context();
  DecayReport rep;
  const auto dens = invariant_density(ctx);
  const AlgNum mass = integrate(f);
  const AlgNum ref = reference_mass ? *reference_mass : mass;
  const AlgNum gap = mass - ref;
  rep.floor = std::fabs(gap.to_double());
  const auto sd = spectral_data(ctx);
  rep.K2 = sd.K2;
  rep.lambda2_mod = sd.lambda2_mod;

  ExactPC fe = f;
  HighPrecPC fh;
  const hp_float ref_h = convert<hp_float>(ref);
  bool high = false;
  for (int N = 0; N <= N_max; ++N) {
    if (!high) {
      rep.max_value_bits = std::max(rep.max_value_bits, detail::value_bits(fe));
      if (detail::value_bits(fe) > bit_cap) {
        high = true;
        rep.fallback_at = N;
        rep.mode = "exact+hp256";
        fh = to_high_precision(fe);
      }
    }
    const double e = high ? detail::l1_distance(fh, dens.u1, ref_h) : detail::l1_distance(fe, dens.u1, ref);
    rep.errors.emplace_back(N, e);
    if (N == N_max) break;
    if (high)
      fh = transfer_apply(fh);
    else
      fe = transfer_apply(fe);
  }

  const double beta = ctx->beta_float();
  for (auto [N, e] : rep.errors) rep.K1_fitted = std::max(rep.K1_fitted, e * std::pow(beta, rep.K2 * N));
  rep.plateau_level = rep.errors.back().second;

  // fit range: N = 1 up to the first N with e_N < 2 * floor (or e_N = 0)
  rep.fit_begin = std::min(1, N_max);
  rep.fit_end = rep.fit_begin;
  while (rep.fit_end <= N_max) {
    const double e = rep.errors[static_cast<std::size_t>(rep.fit_end)].second;
    if (e <= 0 || e < 2 * rep.floor) break;
    ++rep.fit_end;
  }
  const int cnt = rep.fit_end - rep.fit_begin;
  if (cnt >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int N = rep.fit_begin; N < rep.fit_end; ++N) {
      const double y = std::log(rep.errors[static_cast<std::size_t>(N)].second);
      sx += N;
      sy += y;
      sxx += static_cast<double>(N) * N;
      sxy += N * y;
    }
    rep.fitted_rate = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  }
  return rep;
}

}  // namespace betaexp
