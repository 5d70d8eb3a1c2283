#pragma once

// Piecewise-constant functions on [0,1] with half-open cells [b_i, b_{i+1}),
// and the exact action of the transfer operator
//   (P f)(x) = beta^{-1} sum_{j=0}^{q} f((x + j) / beta)
// and the Koopman operator (K g)(x) = g(T(x)) on them.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "betaexp/numeric.hpp"

namespace betaexp {

template <class P, class V>
class PiecewiseConstant {
 public:
  using point_type = P;
  using value_type = V;

  PiecewiseConstant() = default;

  /// breaks: strictly increasing from 0 to 1; values: one per cell.
  PiecewiseConstant(ContextPtr ctx, std::vector<P> breaks, std::vector<V> values)
      : ctx_(std::move(ctx)), breaks_(std::move(breaks)), values_(std::move(values)) {
    validate();
    normalize();
  }

  static PiecewiseConstant constant(const ContextPtr& ctx, const V& v) {
    return PiecewiseConstant(ctx, {Arith<P>::from_long(ctx, 0), Arith<P>::from_long(ctx, 1)}, {v});
  }

  /// v on [a, b), zero elsewhere; 0 <= a < b <= 1.
  static PiecewiseConstant indicator(const ContextPtr& ctx, const P& a, const P& b, const V& v) {
    const P zero = Arith<P>::from_long(ctx, 0), one = Arith<P>::from_long(ctx, 1);
    const V z = Arith<V>::from_long(ctx, 0);
    if (!(less(a, b) && !less(a, zero) && !less(one, b))) throw domain_error("indicator: need 0 <= a < b <= 1");
    std::vector<P> br{zero};
    std::vector<V> vals;
    if (less(zero, a)) {
      br.push_back(a);
      vals.push_back(z);
    }
    vals.push_back(v);
    if (less(b, one)) {
      br.push_back(b);
      vals.push_back(z);
    }
    br.push_back(one);
    return PiecewiseConstant(ctx, std::move(br), std::move(vals));
  }

  const ContextPtr& context() const noexcept { return ctx_; }
  const std::vector<P>& breakpoints() const noexcept { return breaks_; }
  const std::vector<V>& values() const noexcept { return values_; }
  std::size_t cells() const noexcept { return values_.size(); }
  P width(std::size_t i) const { return breaks_[i + 1] - breaks_[i]; }

  /// Value on the cell containing x (half-open cells; x = 1 maps to the last cell).
  V eval(const P& x) const {
    auto it = std::upper_bound(breaks_.begin() + 1, breaks_.end() - 1, x, [](const P& a, const P& b) { return less(a, b); });
    return values_[static_cast<std::size_t>(it - breaks_.begin() - 1)];
  }

  std::vector<double> breakpoints_double() const {
    std::vector<double> out;
    out.reserve(breaks_.size());
    for (const auto& b : breaks_) out.push_back(Arith<P>::to_double(b));
    return out;
  }

  friend bool operator==(const PiecewiseConstant& a, const PiecewiseConstant& b) {
    if (a.cells() != b.cells()) return false;
    for (std::size_t i = 0; i < a.breaks_.size(); ++i)
      if (detail::cmp(detail::Keyed<P>(a.breaks_[i]), detail::Keyed<P>(b.breaks_[i])) != 0) return false;
    for (std::size_t i = 0; i < a.values_.size(); ++i)
      if (!Arith<V>::eq(a.values_[i], b.values_[i])) return false;
    return true;
  }

 private:
  static bool less(const P& a, const P& b) {
    if constexpr (Arith<P>::exact)
      return compare(a, b) < 0;
    else
      return a < b;
  }

  void validate() const {
    if (!ctx_) throw domain_error("PiecewiseConstant: no context");
    if (breaks_.size() < 2 || values_.size() + 1 != breaks_.size())
      throw domain_error("PiecewiseConstant: need one value per cell");
    if constexpr (Arith<P>::exact) {
      if (!breaks_.front().is_zero() || !(breaks_.back() - 1L).is_zero())
        throw domain_error("PiecewiseConstant: breakpoints must start at 0 and end at 1");
    } else {
      if (breaks_.front() != 0 || breaks_.back() != 1)
        throw domain_error("PiecewiseConstant: breakpoints must start at 0 and end at 1");
    }
    for (std::size_t i = 0; i + 1 < breaks_.size(); ++i)
      if (!less(breaks_[i], breaks_[i + 1])) throw domain_error("PiecewiseConstant: breakpoints must increase strictly");
  }

  void normalize() {
    std::size_t w = 0;
    for (std::size_t i = 1; i < values_.size(); ++i) {
      if (Arith<V>::eq(values_[i], values_[w])) continue;
      if (++w == i) continue;
      breaks_[w] = std::move(breaks_[i]);
      values_[w] = std::move(values_[i]);
    }
    if (w + 2 != breaks_.size()) breaks_[w + 1] = std::move(breaks_.back());
    breaks_.resize(w + 2);
    values_.resize(w + 1);
  }

  ContextPtr ctx_;
  std::vector<P> breaks_;
  std::vector<V> values_;
};

using ExactPC = PiecewiseConstant<AlgNum, AlgNum>;
using FloatPC = PiecewiseConstant<double, double>;
using ComplexPC = PiecewiseConstant<double, cplx>;
/// Exact breakpoints with 256-bit float values (fallback for long iterations).
using HighPrecPC = PiecewiseConstant<AlgNum, hp_float>;

namespace detail {

template <class P>
std::vector<Keyed<P>> keyed(const std::vector<P>& pts) {
  std::vector<Keyed<P>> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.emplace_back(p);
  return out;
}

}  // namespace detail

/// Pointwise combination on the common refinement of two partitions.
template <class P, class V, class W, class Op>
auto combine(const PiecewiseConstant<P, V>& f, const PiecewiseConstant<P, W>& g, Op op) {
  using R = decltype(op(f.values()[0], g.values()[0]));
  if (f.context()->n() != g.context()->n() || f.context()->q() != g.context()->q())
    throw mode_mismatch_error("combine: operands from different contexts");
  const auto kf = detail::keyed(f.breakpoints()), kg = detail::keyed(g.breakpoints());
  std::vector<P> br{f.breakpoints().front()};
  std::vector<R> vals;
  std::size_t i = 0, j = 0;  // current cells
  while (i < f.cells() && j < g.cells()) {
    vals.push_back(op(f.values()[i], g.values()[j]));
    const int c = detail::cmp(kf[i + 1], kg[j + 1]);
    br.push_back(c <= 0 ? f.breakpoints()[i + 1] : g.breakpoints()[j + 1]);
    if (c <= 0) ++i;
    if (c >= 0) ++j;
  }
  return PiecewiseConstant<P, R>(f.context(), std::move(br), std::move(vals));
}

template <class P, class V>
PiecewiseConstant<P, V> operator+(const PiecewiseConstant<P, V>& f, const PiecewiseConstant<P, V>& g) {
  return combine(f, g, [](const V& a, const V& b) { return V(a + b); });
}
template <class P, class V>
PiecewiseConstant<P, V> operator-(const PiecewiseConstant<P, V>& f, const PiecewiseConstant<P, V>& g) {
  return combine(f, g, [](const V& a, const V& b) { return V(a - b); });
}
template <class P, class V>
PiecewiseConstant<P, V> multiply(const PiecewiseConstant<P, V>& f, const PiecewiseConstant<P, V>& g) {
  return combine(f, g, [](const V& a, const V& b) { return V(a * b); });
}

/// Applies fn to every cell value.
template <class P, class V, class Fn>
auto map_values(const PiecewiseConstant<P, V>& f, Fn fn) {
  using R = decltype(fn(f.values()[0]));
  std::vector<R> vals;
  vals.reserve(f.cells());
  for (const auto& v : f.values()) vals.push_back(fn(v));
  return PiecewiseConstant<P, R>(f.context(), f.breakpoints(), std::move(vals));
}

template <class P, class V, class S>
PiecewiseConstant<P, V> scale(const PiecewiseConstant<P, V>& f, const S& s) {
  return map_values(f, [&](const V& v) { return V(v * s); });
}

/// (P f)(x) = beta^{-1} sum_j f((x+j)/beta), breakpoints {beta*b - j} in (0,1).
template <class P, class V>
PiecewiseConstant<P, V> transfer_apply(const PiecewiseConstant<P, V>& f) {
  const auto& ctx = f.context();
  const int q = ctx->q();
  const std::size_t m = f.cells();
  const auto& vals = f.values();

  std::vector<detail::Keyed<P>> scaled;
  scaled.reserve(m + 1);
  for (const auto& b : f.breakpoints()) scaled.emplace_back(Arith<P>::mul_beta(ctx, b));
  const detail::Keyed<P> zero(Arith<P>::from_long(ctx, 0)), one(Arith<P>::from_long(ctx, 1));

  // Per branch j: the piece of f seen at the current x, and the pending
  // image breakpoints beta*b_i - j inside (0,1).
  struct Event {
    detail::Keyed<P> y;
    std::size_t piece;
  };
  std::vector<std::vector<Event>> events(static_cast<std::size_t>(q + 1));
  std::vector<std::ptrdiff_t> cur(static_cast<std::size_t>(q + 1), -1);
  for (int j = 0; j <= q; ++j) {
    auto& ev = events[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i <= m; ++i) {
      auto y = scaled[i].shifted(j);
      if (detail::cmp(y, zero) <= 0) {
        cur[static_cast<std::size_t>(j)] = static_cast<std::ptrdiff_t>(i);
        continue;
      }
      if (detail::cmp(y, one) >= 0) break;
      ev.push_back({std::move(y), i});
    }
  }

  auto cell_value = [&] {
    V acc = Arith<V>::from_long(ctx, 0);
    for (auto c : cur)
      if (c >= 0 && static_cast<std::size_t>(c) < m) acc += vals[static_cast<std::size_t>(c)];
    return Arith<V>::div_beta(ctx, acc);
  };

  std::vector<P> br{zero.v};
  std::vector<V> out;
  std::vector<std::size_t> head(static_cast<std::size_t>(q + 1), 0);
  for (;;) {
    out.push_back(cell_value());
    int best = -1;
    for (int j = 0; j <= q; ++j) {
      const auto& ev = events[static_cast<std::size_t>(j)];
      if (head[static_cast<std::size_t>(j)] >= ev.size()) continue;
      if (best < 0 || detail::cmp(ev[head[static_cast<std::size_t>(j)]].y,
                                  events[static_cast<std::size_t>(best)][head[static_cast<std::size_t>(best)]].y) < 0)
        best = j;
    }
    if (best < 0) break;
    const auto at = events[static_cast<std::size_t>(best)][head[static_cast<std::size_t>(best)]].y;
    for (int j = 0; j <= q; ++j) {
      auto& ev = events[static_cast<std::size_t>(j)];
      auto& h = head[static_cast<std::size_t>(j)];
      while (h < ev.size() && detail::cmp(ev[h].y, at) == 0) {
        cur[static_cast<std::size_t>(j)] = static_cast<std::ptrdiff_t>(ev[h].piece);
        ++h;
      }
    }
    br.push_back(at.v);
  }
  br.push_back(one.v);
  return PiecewiseConstant<P, V>(ctx, std::move(br), std::move(out));
}

/// (K g)(x) = g(beta*x - j) on [j/beta, (j+1)/beta), breakpoints (b+j)/beta.
template <class P, class V>
PiecewiseConstant<P, V> koopman_apply(const PiecewiseConstant<P, V>& g) {
  const auto& ctx = g.context();
  const int q = ctx->q();
  const detail::Keyed<P> one(Arith<P>::from_long(ctx, 1));
  std::vector<P> br;
  std::vector<V> out;
  for (int j = 0; j <= q; ++j) {
    for (std::size_t i = 0; i < g.cells(); ++i) {
      P start = Arith<P>::div_beta(ctx, P(g.breakpoints()[i] + Arith<P>::from_long(ctx, j)));
      if (j == q && detail::cmp(detail::Keyed<P>(start), one) >= 0) break;
      if constexpr (!Arith<P>::exact) {
        if (!br.empty() && start - br.back() <= kFloatBreakTol) {
          out.back() = g.values()[i];
          continue;
        }
      }
      br.push_back(std::move(start));
      out.push_back(g.values()[i]);
    }
  }
  br.push_back(one.v);
  return PiecewiseConstant<P, V>(ctx, std::move(br), std::move(out));
}

template <class P, class V>
PiecewiseConstant<P, V> transfer_power(PiecewiseConstant<P, V> f, int k) {
  for (int i = 0; i < k; ++i) f = transfer_apply(f);
  return f;
}

template <class P, class V>
V integrate(const PiecewiseConstant<P, V>& f) {
  V acc = Arith<V>::from_long(f.context(), 0);
  for (std::size_t i = 0; i < f.cells(); ++i) acc += f.values()[i] * convert<V>(f.width(i));
  return acc;
}

/// <f, g> = integral of conj(f) g.
template <class P, class V>
V inner_product(const PiecewiseConstant<P, V>& f, const PiecewiseConstant<P, V>& g) {
  return integrate(combine(f, g, [](const V& a, const V& b) { return V(Arith<V>::conj(a) * b); }));
}

/// Exact L1 norm for real exact values.
inline AlgNum norm1_exact(const ExactPC& f) {
  AlgNum acc(f.context(), 0L);
  for (std::size_t i = 0; i < f.cells(); ++i) {
    const auto& v = f.values()[i];
    acc += (v.sign() < 0 ? -v : v) * f.width(i);
  }
  return acc;
}

/// L^p norm for p in {1, 2, infinity} (p <= 0 means infinity), in double.
template <class P, class V>
double norm(const PiecewiseConstant<P, V>& f, int p) {
  if (p <= 0) {
    double m = 0;
    for (const auto& v : f.values()) m = std::max(m, Arith<V>::magnitude(v));
    return m;
  }
  if (p != 1 && p != 2) throw domain_error("norm: p must be 1, 2 or infinity");
  long double acc = 0;
  for (std::size_t i = 0; i < f.cells(); ++i) {
    const long double a = Arith<V>::magnitude(f.values()[i]);
    const long double w = Arith<P>::to_double(f.width(i));
    acc += (p == 1 ? a : a * a) * w;
  }
  return static_cast<double>(p == 1 ? acc : std::sqrt(acc));
}

/// <P f, g> - <f, K g>; exactly zero in exact mode.
template <class P, class V>
V duality_check(const PiecewiseConstant<P, V>& f, const PiecewiseConstant<P, V>& g) {
  return inner_product(transfer_apply(f), g) - inner_product(f, koopman_apply(g));
}

inline FloatPC to_float(const ExactPC& f) {
  std::vector<double> br = f.breakpoints_double();
  br.front() = 0;
  br.back() = 1;
  std::vector<double> vals;
  for (const auto& v : f.values()) vals.push_back(v.to_double());
  return FloatPC(f.context(), std::move(br), std::move(vals));
}

inline ComplexPC to_complex(const FloatPC& f) {
  std::vector<cplx> vals(f.values().begin(), f.values().end());
  return ComplexPC(f.context(), f.breakpoints(), std::move(vals));
}

inline HighPrecPC to_high_precision(const ExactPC& f) {
  return map_values(f, [](const AlgNum& v) { return convert<hp_float>(v); });
}

/// ||u^{1/p} K(u^{-1/p} f)||_p - ||f||_p for a positive density u.
template <class P, class V>
double weighted_isometry_check(const PiecewiseConstant<P, V>& u, const PiecewiseConstant<P, V>& f, int p) {
  if (p != 1 && p != 2) throw domain_error("weighted_isometry_check: p must be 1 or 2");
  FloatPC uf, ff;
  if constexpr (std::is_same_v<P, AlgNum>) {
    uf = to_float(u);
    ff = to_float(f);
  } else {
    uf = u;
    ff = f;
  }
  const double inv_p = 1.0 / p;
  auto up = map_values(uf, [&](double v) { return std::pow(v, inv_p); });
  auto um = map_values(uf, [&](double v) { return std::pow(v, -inv_p); });
  auto lhs = multiply(up, koopman_apply(multiply(um, ff)));
  return norm(lhs, p) - norm(ff, p);
}

}  // namespace betaexp
