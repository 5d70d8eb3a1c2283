#pragma once

// Piecewise-exponential functions on [0,1]: each cell [b_i, b_{i+1}) carries
// a finite sum of terms a * exp(i w t) (t absolute). The class is closed
// under the transfer and Koopman operators and under multiplication by
// piecewise constants, which is enough to build psi_0 and the truncated
// Neumann eigenfunctions psi_z.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "betaexp/expansion.hpp"
#include "betaexp/layers.hpp"

namespace betaexp {

struct ExpTerm {
  cplx amp;
  double freq;
};

using TermList = std::vector<ExpTerm>;

/// Default cap on the total number of (cell, term) pairs.
inline constexpr std::size_t kPieceCap = 10'000'000;

namespace detail {

inline bool same_freq(double a, double b) { return std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(a)); }

// Sorts by frequency and adds amplitudes of equal frequencies.
inline void merge_terms(TermList& t) {
  std::sort(t.begin(), t.end(), [](const ExpTerm& a, const ExpTerm& b) { return a.freq < b.freq; });
  std::size_t w = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (w > 0 && same_freq(t[w - 1].freq, t[i].freq))
      t[w - 1].amp += t[i].amp;
    else
      t[w++] = t[i];
  }
  t.resize(w);
  std::erase_if(t, [](const ExpTerm& e) { return e.amp == cplx(0); });
}

// integral of exp(i d t) over [a, b), stable for small d
inline cplx exp_integral(double d, double a, double b) {
  const double h = 0.5 * (b - a);
  const double x = d * h;
  const double sinc = std::fabs(x) < 1e-8 ? 1.0 - x * x / 6 : std::sin(x) / x;
  return std::polar(2 * h * sinc, d * (a + b) * 0.5);
}

// Sorted union of breakpoint lists, identifying points within kFloatBreakTol.
inline std::vector<double> unite(std::vector<double> pts) {
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double p : pts) {
    if (p < 0 || p > 1) continue;
    if (!out.empty() && p - out.back() <= kFloatBreakTol) continue;
    out.push_back(p);
  }
  if (out.empty() || out.front() > kFloatBreakTol) out.insert(out.begin(), 0.0);
  out.front() = 0;
  if (1 - out.back() <= kFloatBreakTol)
    out.back() = 1;
  else
    out.push_back(1);
  return out;
}

}  // namespace detail

class PiecewiseExp {
 public:
  PiecewiseExp() = default;

  /// breaks: increasing from 0 to 1; one term list per cell.
  PiecewiseExp(ContextPtr ctx, std::vector<double> breaks, std::vector<TermList> terms)
      : ctx_(std::move(ctx)), breaks_(std::move(breaks)), terms_(std::move(terms)) {
    if (!ctx_) throw domain_error("PiecewiseExp: no context");
    if (breaks_.size() < 2 || terms_.size() + 1 != breaks_.size())
      throw domain_error("PiecewiseExp: need one term list per cell");
    if (breaks_.front() != 0 || breaks_.back() != 1)
      throw domain_error("PiecewiseExp: breakpoints must start at 0 and end at 1");
    for (std::size_t i = 0; i + 1 < breaks_.size(); ++i)
      if (!(breaks_[i] < breaks_[i + 1])) throw domain_error("PiecewiseExp: breakpoints must increase strictly");
    for (auto& t : terms_) detail::merge_terms(t);
    normalize();
  }

  static PiecewiseExp zero(const ContextPtr& ctx) { return PiecewiseExp(ctx, {0.0, 1.0}, {TermList{}}); }

  /// a * exp(i w t) on all of [0,1).
  static PiecewiseExp exponential(const ContextPtr& ctx, cplx a, double w) {
    return PiecewiseExp(ctx, {0.0, 1.0}, {TermList{{a, w}}});
  }

  template <class P, class V>
  static PiecewiseExp from_pc(const PiecewiseConstant<P, V>& f) {
    std::vector<double> br = f.breakpoints_double();
    br.front() = 0;
    br.back() = 1;
    std::vector<TermList> t;
    for (const auto& v : f.values()) {
      cplx c;
      if constexpr (std::is_same_v<V, cplx>)
        c = v;
      else
        c = cplx(Arith<V>::to_double(v));
      t.push_back(c == cplx(0) ? TermList{} : TermList{{c, 0.0}});
    }
    return PiecewiseExp(f.context(), std::move(br), std::move(t));
  }

  const ContextPtr& context() const noexcept { return ctx_; }
  const std::vector<double>& breakpoints() const noexcept { return breaks_; }
  const std::vector<TermList>& terms() const noexcept { return terms_; }
  std::size_t cells() const noexcept { return terms_.size(); }

  /// Number of (cell, term) pairs, i.e. pieces a*exp(i w t) on an interval.
  std::size_t piece_count() const {
    std::size_t c = 0;
    for (const auto& t : terms_) c += t.size();
    return c;
  }

  std::size_t cell_index(double x) const {
    auto it = std::upper_bound(breaks_.begin() + 1, breaks_.end() - 1, x);
    return static_cast<std::size_t>(it - breaks_.begin() - 1);
  }

  cplx eval(double x) const {
    if (x < 0 || x > 1) return 0;
    cplx acc = 0;
    for (const auto& e : terms_[cell_index(x)]) acc += e.amp * std::polar(1.0, e.freq * x);
    return acc;
  }

  /// Flat list (a, b, amplitude, frequency) of all pieces, sorted by a.
  struct Piece {
    double a, b;
    cplx amp;
    double freq;
  };
  std::vector<Piece> pieces() const {
    std::vector<Piece> out;
    for (std::size_t i = 0; i < cells(); ++i)
      for (const auto& e : terms_[i]) out.push_back({breaks_[i], breaks_[i + 1], e.amp, e.freq});
    return out;
  }

 private:
  static bool same_terms(const TermList& a, const TermList& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].amp != b[i].amp || a[i].freq != b[i].freq) return false;
    return true;
  }

  void normalize() {
    std::vector<double> br{breaks_.front()};
    std::vector<TermList> t;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (!t.empty() && same_terms(t.back(), terms_[i])) {
        br.back() = breaks_[i + 1];
        continue;
      }
      t.push_back(std::move(terms_[i]));
      br.push_back(breaks_[i + 1]);
    }
    breaks_ = std::move(br);
    terms_ = std::move(t);
  }

  ContextPtr ctx_;
  std::vector<double> breaks_;
  std::vector<TermList> terms_;
};

namespace detail {

inline void check_cap(std::size_t pieces, std::size_t cap) {
  if (pieces > cap)
    throw resource_error("piecewise-exponential piece count " + std::to_string(pieces) +
                         " exceeds the cap; use grid mode");
}

// Rebuilds a function on the grid `br` whose cell with midpoint x gets terms fn(x).
template <class Fn>
PiecewiseExp rebuild(const ContextPtr& ctx, std::vector<double> br, Fn fn, std::size_t cap) {
  std::vector<TermList> t;
  t.reserve(br.size() - 1);
  std::size_t count = 0;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    t.push_back(fn(0.5 * (br[i] + br[i + 1])));
    count += t.back().size();
    check_cap(count, cap);
  }
  return PiecewiseExp(ctx, std::move(br), std::move(t));
}

}  // namespace detail

template <class Op>
PiecewiseExp combine(const PiecewiseExp& f, const PiecewiseExp& g, Op op, std::size_t cap = kPieceCap) {
  std::vector<double> pts = f.breakpoints();
  pts.insert(pts.end(), g.breakpoints().begin(), g.breakpoints().end());
  return detail::rebuild(f.context(), detail::unite(std::move(pts)),
                         [&](double x) { return op(f.terms()[f.cell_index(x)], g.terms()[g.cell_index(x)]); }, cap);
}

inline PiecewiseExp operator+(const PiecewiseExp& f, const PiecewiseExp& g) {
  return combine(f, g, [](const TermList& a, const TermList& b) {
    TermList t = a;
    t.insert(t.end(), b.begin(), b.end());
    return t;
  });
}

inline PiecewiseExp scale(const PiecewiseExp& f, cplx s) {
  std::vector<TermList> t = f.terms();
  for (auto& l : t)
    for (auto& e : l) e.amp *= s;
  return PiecewiseExp(f.context(), f.breakpoints(), std::move(t));
}

inline PiecewiseExp operator-(const PiecewiseExp& f, const PiecewiseExp& g) { return f + scale(g, -1.0); }

/// psi * f for a piecewise-constant f.
template <class P, class V>
PiecewiseExp mul_pc(const PiecewiseExp& psi, const PiecewiseConstant<P, V>& f, std::size_t cap = kPieceCap) {
  return combine(psi, PiecewiseExp::from_pc(f), [](const TermList& a, const TermList& b) {
    TermList t;
    if (b.empty()) return t;
    for (auto e : a) {
      e.amp *= b.front().amp;
      t.push_back(e);
    }
    return t;
  }, cap);
}

/// (P psi)(x) = beta^{-1} sum_j psi((x + j)/beta): a term (c, w) seen through
/// branch j becomes (c e^{i w j / beta} / beta, w / beta).
inline PiecewiseExp pexp_transfer(const PiecewiseExp& psi, std::size_t cap = kPieceCap) {
  const auto& ctx = psi.context();
  const double beta = ctx->beta_float();
  const int q = ctx->q();
  std::vector<double> pts;
  for (int j = 0; j <= q; ++j)
    for (double b : psi.breakpoints()) pts.push_back(beta * b - j);
  return detail::rebuild(ctx, detail::unite(std::move(pts)), [&](double x) {
    TermList t;
    for (int j = 0; j <= q; ++j) {
      const double y = (x + j) / beta;
      if (y >= 1) break;
      for (const auto& e : psi.terms()[psi.cell_index(y)])
        t.push_back({e.amp * std::polar(1.0 / beta, e.freq * j / beta), e.freq / beta});
    }
    detail::merge_terms(t);
    return t;
  }, cap);
}

/// (K psi)(x) = psi(beta x - j) on [j/beta, (j+1)/beta): a term (c, w)
/// becomes (c e^{-i w j}, w beta).
inline PiecewiseExp pexp_koopman(const PiecewiseExp& psi, std::size_t cap = kPieceCap) {
  const auto& ctx = psi.context();
  const double beta = ctx->beta_float();
  const int q = ctx->q();
  std::vector<double> pts;
  for (int j = 0; j <= q; ++j)
    for (double b : psi.breakpoints()) pts.push_back((b + j) / beta);
  return detail::rebuild(ctx, detail::unite(std::move(pts)), [&](double x) {
    const double bx = beta * x;
    const int j = std::min(q, static_cast<int>(std::floor(bx)));
    TermList t;
    for (const auto& e : psi.terms()[psi.cell_index(bx - j)])
      t.push_back({e.amp * std::polar(1.0, -e.freq * j), e.freq * beta});
    return t;
  }, cap);
}

/// <f, g> = integral of conj(f) g, in closed form per cell and term pair.
inline cplx inner_product(const PiecewiseExp& f, const PiecewiseExp& g) {
  std::vector<double> pts = f.breakpoints();
  pts.insert(pts.end(), g.breakpoints().begin(), g.breakpoints().end());
  const auto br = detail::unite(std::move(pts));
  cplx acc = 0;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    const double mid = 0.5 * (br[i] + br[i + 1]);
    const auto& a = f.terms()[f.cell_index(mid)];
    const auto& b = g.terms()[g.cell_index(mid)];
    for (const auto& s : a)
      for (const auto& t : b) acc += std::conj(s.amp) * t.amp * detail::exp_integral(t.freq - s.freq, br[i], br[i + 1]);
  }
  return acc;
}

inline double norm2(const PiecewiseExp& f) { return std::sqrt(std::max(0.0, inner_product(f, f).real())); }

/// The points x_j = q beta^{-2} + ... + q beta^{-n} + j/beta, 0 <= j <= q.
inline std::vector<AlgNum> psi0_points(const ContextPtr& ctx) {
  AlgNum base(ctx, 0L);
  for (int k = 2; k <= ctx->n(); ++k) base += AlgNum::beta_pow(ctx, -k) * static_cast<long>(ctx->q());
  std::vector<AlgNum> x;
  for (int j = 0; j <= ctx->q(); ++j) x.push_back(base + AlgNum::inv_beta(ctx) * static_cast<long>(j));
  return x;
}

/// The bounded eigenfunction of P for the eigenvalue 0.
inline PiecewiseExp psi0(const ContextPtr& ctx) {
  const int q = ctx->q();
  const double beta = ctx->beta_float();
  const auto x = psi0_points(ctx);
  std::vector<double> br;
  std::vector<TermList> t;
  for (int j = 0; j <= q; ++j) {
    const AlgNum a = AlgNum::inv_beta(ctx) * static_cast<long>(j);
    if (j == q && compare(a, AlgNum(ctx, 1L)) >= 0) break;
    br.push_back(a.to_double());
    if (q == 1) {
      t.push_back({{1.0, std::numbers::pi * beta}});
      if (j == 0) {
        br.push_back(x[0].to_double());
        t.push_back({});
      }
    } else {
      t.push_back({{1.0, 2 * std::numbers::pi * beta / (q + 1)}});
      if (j < q) {
        br.push_back(x[static_cast<std::size_t>(j)].to_double());
        t.push_back({{1.0, 2 * std::numbers::pi * beta / q}});
      }
    }
  }
  br.push_back(1.0);
  br.front() = 0;
  return PiecewiseExp(ctx, std::move(br), std::move(t));
}

/// Values of u1^{1/2} and u1^{-1/2}, computed at 256-bit precision.
struct DensityRoots {
  FloatPC sqrt_u, inv_sqrt_u, u, inv_u;
};

inline DensityRoots density_roots(const ContextPtr& ctx) {
  const auto u1 = invariant_density(ctx).u1;
  const auto uh = to_high_precision(u1);
  auto br = u1.breakpoints_double();
  br.front() = 0;
  br.back() = 1;
  std::vector<double> sp, sm, up, um;
  for (const auto& v : uh.values()) {
    const hp_float r = sqrt(v);
    sp.push_back(r.convert_to<double>());
    sm.push_back(hp_float(1 / r).convert_to<double>());
    up.push_back(v.convert_to<double>());
    um.push_back(hp_float(1 / v).convert_to<double>());
  }
  return {FloatPC(ctx, br, sp), FloatPC(ctx, br, sm), FloatPC(ctx, br, up), FloatPC(ctx, br, um)};
}

/// W psi = u1^{1/2} K (u1^{-1/2} psi), the weighted Koopman isometry on L^2.
inline PiecewiseExp weighted_koopman(const PiecewiseExp& psi, const DensityRoots& d, std::size_t cap = kPieceCap) {
  return mul_pc(pexp_koopman(mul_pc(psi, d.inv_sqrt_u, cap), cap), d.sqrt_u, cap);
}

struct PsiZResult {
  std::optional<PiecewiseExp> psi;  // empty in grid mode
  std::string mode;                 // "pieces" or "grid"
  /// |z|^{M+1} ||u1^{1/2} W^M u1^{-1/2} psi_0||_2, the exact norm of the residual.
  double residual_bound = 0;
  /// ||P psi_z - z psi_z||_2 computed directly.
  double residual_l2 = 0;
  /// max_m | ||W^m h||_2 - ||h||_2 | with h = u1^{-1/2} psi_0.
  double isometry_defect = 0;
  std::size_t pieces = 0;
  std::size_t grid_points = 0;
};

namespace detail {

// psi_z evaluated pointwise: sum_m z^m u1(x) psi0(T^m x) / u1(T^m x).
inline cplx psi_z_point(const ContextPtr& ctx, const PiecewiseExp& p0, const FloatPC& u, cplx z, int M, double x) {
  cplx acc = 0, zm = 1;
  const double ux = u.eval(x);
  double y = x;
  for (int m = 0; m <= M; ++m) {
    acc += zm * ux * p0.eval(y) / u.eval(y);
    zm *= z;
    if (m < M) y = t_beta(ctx, y);
  }
  return acc;
}

}  // namespace detail

/// Truncated Neumann series psi_z^{(M)} = u1^{1/2} sum_{m<=M} z^m W^m u1^{-1/2} psi_0.
/// Falls back to midpoint sampling on a uniform grid when the piece count
/// exceeds `cap`.
inline PsiZResult psi_z(const ContextPtr& ctx, cplx z, int M, std::size_t cap = kPieceCap,
                        std::size_t grid = std::size_t{1} << 20) {
  if (!(std::abs(z) < 1)) throw domain_error("psi_z: need |z| < 1");
  if (M < 0) throw domain_error("psi_z: truncation must be >= 0");
  const auto d = density_roots(ctx);
  const auto p0 = psi0(ctx);
  PsiZResult res;
  try {
    PiecewiseExp h = mul_pc(p0, d.inv_sqrt_u, cap);
    const double hn = norm2(h);
    PiecewiseExp acc = mul_pc(h, d.sqrt_u, cap);
    cplx zm = 1;
    for (int m = 1; m <= M; ++m) {
      h = weighted_koopman(h, d, cap);
      res.isometry_defect = std::max(res.isometry_defect, std::fabs(norm2(h) - hn));
      zm *= z;
      acc = acc + scale(mul_pc(h, d.sqrt_u, cap), zm);
      detail::check_cap(acc.piece_count(), cap);
    }
    res.residual_bound = std::pow(std::abs(z), M + 1) * norm2(mul_pc(h, d.sqrt_u, cap));
    res.residual_l2 = norm2(pexp_transfer(acc, cap) - scale(acc, z));
    res.pieces = acc.piece_count();
    res.mode = "pieces";
    res.psi = std::move(acc);
    return res;
  } catch (const resource_error&) {
  }
  // grid mode: midpoint rule on a uniform grid
  res.mode = "grid";
  res.grid_points = grid;
  const double beta = ctx->beta_float();
  const int q = ctx->q();
  const double hstep = 1.0 / static_cast<double>(grid);
  double r2 = 0, w2 = 0, wm2 = 0, h2 = 0;
  for (std::size_t i = 0; i < grid; ++i) {
    const double x = (static_cast<double>(i) + 0.5) * hstep;
    cplx Pp = 0;
    for (int j = 0; j <= q; ++j) {
      const double y = (x + j) / beta;
      if (y >= 1) break;
      Pp += detail::psi_z_point(ctx, p0, d.u, z, M, y);
    }
    Pp /= beta;
    r2 += std::norm(Pp - z * detail::psi_z_point(ctx, p0, d.u, z, M, x));
    double y = x;
    for (int m = 0; m < M; ++m) y = t_beta(ctx, y);
    const double uy = d.u.eval(y), p2 = std::norm(p0.eval(y));
    w2 += d.u.eval(x) * d.u.eval(x) * p2 / (uy * uy);
    wm2 += d.u.eval(x) * p2 / (uy * uy);
    h2 += std::norm(p0.eval(x)) / d.u.eval(x);
  }
  res.residual_l2 = std::sqrt(r2 * hstep);
  res.residual_bound = std::pow(std::abs(z), M + 1) * std::sqrt(w2 * hstep);
  res.isometry_defect = std::fabs(std::sqrt(wm2 * hstep) - std::sqrt(h2 * hstep));
  return res;
}

/// Samples (t, psi(t)) at `count` midpoints of a uniform grid.
inline std::vector<std::pair<double, cplx>> sample(const PiecewiseExp& psi, std::size_t count) {
  std::vector<std::pair<double, cplx>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(count);
    out.emplace_back(t, psi.eval(t));
  }
  return out;
}

}  // namespace betaexp
