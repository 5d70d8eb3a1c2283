#pragma once

// Exact arithmetic in Q(beta) for the Parry-type base beta_{n,q}, the unique
// positive root of P(x) = x^n - q(x^{n-1} + ... + x + 1).
//
// A BetaContext owns a certified rational enclosure of beta and fixed-point
// integer enclosures of its powers, which decide signs of field elements.
// AlgNum is an element c_0 + c_1 beta + ... + c_{n-1} beta^{n-1} with
// rational coefficients, always reduced modulo P.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "betaexp/errors.hpp"
#include "betaexp/qpoly.hpp"
#include "betaexp/roots.hpp"

namespace betaexp {

class BetaContext;
using ContextPtr = std::shared_ptr<const BetaContext>;

/// Root structure of P_{n,q}: beta plus the n-1 conjugates with inclusion radii.
struct PisotReport {
  mpq_class beta_lo, beta_hi;
  roots::RootEstimate beta_root;
  std::vector<roots::RootEstimate> other_roots;
  double annulus_lo = 0;  // (q/(q+2))^{1/n}
  bool deflation_exact = false;
  bool all_inside_unit_disk = false;
  bool outside_annulus = false;
  bool multiplicities_simple = false;
  long double modulus_product = 0;  // product of |root| over all n roots

  bool passed() const {
    return deflation_exact && all_inside_unit_disk && outside_annulus && multiplicities_simple;
  }
};

namespace detail {

// Integer enclosure at `bits` binary digits: root in (root/2^bits, (root+1)/2^bits)
// and lo[i] <= beta^i * 2^bits <= hi[i] for 0 <= i < n.
struct FixedLevel {
  unsigned bits = 0;
  mpz_class root;
  std::vector<mpz_class> lo, hi;
};

// P(X / 2^bits) * 2^(n*bits)
inline mpz_class scaled_p(int n, int q, const mpz_class& x, unsigned bits) {
  mpz_class acc = 0, xp = 1;
  for (int i = 0; i < n; ++i) {
    mpz_class t = xp << static_cast<mp_bitcnt_t>(static_cast<unsigned>(n - i) * bits);
    acc += t;
    xp *= x;
  }
  return xp - q * acc;
}

// P'(X / 2^bits) * 2^((n-1)*bits)
inline mpz_class scaled_dp(int n, int q, const mpz_class& x, unsigned bits) {
  mpz_class acc = 0, xp = 1;
  for (int i = 1; i < n; ++i) {
    mpz_class t = xp << static_cast<mp_bitcnt_t>(static_cast<unsigned>(n - i) * bits);
    acc += i * t;
    xp *= x;
  }
  return n * xp - q * acc;
}

inline FixedLevel make_level(int n, int q, unsigned bits, double guess) {
  FixedLevel lv;
  lv.bits = bits;
  mpz_class x(guess * 9007199254740992.0);  // guess * 2^53
  if (bits >= 53)
    x <<= bits - 53;
  else
    x >>= 53 - bits;
  for (int it = 0; it < 200; ++it) {
    mpz_class d = scaled_dp(n, q, x, bits);
    if (sgn(d) == 0) break;
    mpz_class step = scaled_p(n, q, x, bits) / d;
    x -= step;
    if (abs(step) <= 1) break;
  }
  while (sgn(scaled_p(n, q, x, bits)) >= 0) --x;
  while (sgn(scaled_p(n, q, x + 1, bits)) <= 0) ++x;
  lv.root = x;
  lv.lo.resize(static_cast<std::size_t>(n));
  lv.hi.resize(static_cast<std::size_t>(n));
  const mpz_class one = mpz_class(1) << bits;
  lv.lo[0] = lv.hi[0] = one;
  mpz_class plo = x, phi = x + 1;
  for (int i = 1; i < n; ++i) {
    // (X/2^b)^i * 2^b = X^i / 2^{(i-1)b}
    const auto shift = static_cast<mp_bitcnt_t>(static_cast<unsigned>(i - 1) * bits);
    mpz_fdiv_q_2exp(lv.lo[static_cast<std::size_t>(i)].get_mpz_t(), plo.get_mpz_t(), shift);
    mpz_cdiv_q_2exp(lv.hi[static_cast<std::size_t>(i)].get_mpz_t(), phi.get_mpz_t(), shift);
    plo *= x;
    phi *= x + 1;
  }
  return lv;
}

inline std::size_t bit_size(const mpz_class& z) {
  return sgn(z) == 0 ? 0 : mpz_sizeinbase(z.get_mpz_t(), 2);
}

}  // namespace detail

class AlgNum;

class BetaContext : public std::enable_shared_from_this<BetaContext> {
 public:
  int n() const noexcept { return n_; }
  int q() const noexcept { return q_; }
  /// Coefficients of P_{n,q}, leading term first: [1, -q, ..., -q].
  const std::vector<long>& p_coeffs() const noexcept { return p_coeffs_; }
  /// P_{n,q} as a rational polynomial, lowest degree first.
  const qpoly::poly& p_poly() const noexcept { return p_poly_; }
  const mpq_class& beta_lo() const noexcept { return beta_lo_; }
  const mpq_class& beta_hi() const noexcept { return beta_hi_; }
  const mpq_class& tolerance() const noexcept { return tol_; }
  double beta_float() const noexcept { return beta_float_; }
  /// beta^i rounded to double, 0 <= i < n.
  const std::vector<double>& beta_powers() const noexcept { return beta_pow_; }
  const std::vector<mpq_class>& inv_beta_coeffs() const noexcept { return inv_beta_; }
  /// Certified from the root report: every conjugate lies strictly inside the
  /// unit disk, so a proper integer factor would have |constant term| < 1.
  bool irreducible() const noexcept { return irreducible_; }
  const PisotReport& pisot() const noexcept { return pisot_; }

  mpq_class eval_p(const mpq_class& x) const { return qpoly::eval(p_poly_, x); }

  /// Level with at least `bits` digits; cached levels are returned directly,
  /// finer ones are built into `scratch`.
  const detail::FixedLevel& level(unsigned bits, detail::FixedLevel& scratch) const {
    for (const auto& lv : levels_)
      if (lv.bits >= bits) return lv;
    unsigned b = levels_.back().bits;
    while (b < bits) b *= 4;
    scratch = detail::make_level(n_, q_, b, beta_float_);
    return scratch;
  }

  /// beta rounded to `digits` decimal places.
  std::string beta_decimal(int digits = 30) const;

  ContextPtr ptr() const { return shared_from_this(); }

 private:
  friend ContextPtr make_context(int n, int q, const mpq_class& tol);
  BetaContext() = default;

  int n_ = 0, q_ = 0;
  std::vector<long> p_coeffs_;
  qpoly::poly p_poly_;
  mpq_class beta_lo_, beta_hi_, tol_;
  double beta_float_ = 0;
  std::vector<double> beta_pow_;
  std::vector<mpq_class> inv_beta_;
  std::vector<detail::FixedLevel> levels_;
  bool irreducible_ = false;
  PisotReport pisot_;
};

namespace detail {

inline double nearest_double(const mpq_class& v) {
  double d = v.get_d();
  const double up = std::nextafter(d, sgn(v) >= 0 ? INFINITY : -INFINITY);
  mpq_class e1 = abs(v - mpq_class(d)), e2 = abs(v - mpq_class(up));
  return e2 < e1 ? up : d;
}

inline std::string fixed_decimal(const mpz_class& scaled, int digits) {
  // scaled = round(value * 10^digits)
  mpz_class a = abs(scaled);
  std::string s = a.get_str();
  if (static_cast<int>(s.size()) <= digits) s.insert(0, static_cast<std::size_t>(digits + 1 - static_cast<int>(s.size())), '0');
  if (digits > 0) s.insert(s.size() - static_cast<std::size_t>(digits), ".");
  if (sgn(scaled) < 0) s.insert(0, "-");
  return s;
}

inline mpz_class round_div(const mpz_class& num, const mpz_class& den) {
  // den > 0; rounds half away from zero
  mpz_class twice = 2 * num + (sgn(num) >= 0 ? den : mpz_class(-den));
  mpz_class out;
  mpz_tdiv_q(out.get_mpz_t(), twice.get_mpz_t(), mpz_class(2 * den).get_mpz_t());
  return out;
}

inline PisotReport compute_pisot(const BetaContext& ctx) {
  const int n = ctx.n(), q = ctx.q();
  PisotReport rep;
  rep.beta_lo = ctx.beta_lo();
  rep.beta_hi = ctx.beta_hi();
  rep.annulus_lo = std::pow(static_cast<double>(q) / (q + 2), 1.0 / n);

  // Q(z) = z^{n+1} - (q+1) z^n + q, then remove the known root z = 1 by
  // synthetic division; the quotient must be P exactly.
  std::vector<long> qz(static_cast<std::size_t>(n + 2), 0);
  qz[0] = q;
  qz[static_cast<std::size_t>(n)] = -(q + 1);
  qz[static_cast<std::size_t>(n + 1)] = 1;
  std::vector<long> quot(static_cast<std::size_t>(n + 1), 0);
  long carry = 0;
  for (int i = n + 1; i >= 1; --i) {
    carry = qz[static_cast<std::size_t>(i)] + carry;
    quot[static_cast<std::size_t>(i - 1)] = carry;
  }
  const long remainder = qz[0] + carry;
  rep.deflation_exact = remainder == 0;
  for (int i = 0; i <= n; ++i)
    if (mpq_class(quot[static_cast<std::size_t>(i)]) != ctx.p_poly()[static_cast<std::size_t>(i)]) rep.deflation_exact = false;

  std::vector<long double> coeffs(quot.begin(), quot.end());
  auto all = roots::aberth(coeffs);

  const long double beta = ctx.beta_float();
  auto it = std::min_element(all.begin(), all.end(), [&](const auto& a, const auto& b) {
    return std::abs(a.value - beta) < std::abs(b.value - beta);
  });
  rep.beta_root = *it;
  rep.multiplicities_simple = roots::disks_disjoint(all);
  rep.modulus_product = 1;
  for (const auto& r : all) rep.modulus_product *= std::abs(r.value);
  all.erase(it);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    const auto ma = std::abs(a.value), mb = std::abs(b.value);
    if (ma != mb) return ma > mb;
    return a.value.imag() > b.value.imag();
  });
  rep.other_roots = all;
  rep.all_inside_unit_disk = true;
  rep.outside_annulus = true;
  for (const auto& r : rep.other_roots) {
    const long double m = std::abs(r.value);
    if (!(m + r.radius < 1)) rep.all_inside_unit_disk = false;
    if (!(m - r.radius > rep.annulus_lo)) rep.outside_annulus = false;
  }
  return rep;
}

}  // namespace detail

/// Builds the context for (n, q) with beta enclosed in an interval of width
/// exactly `tol` (narrower only when needed to stay inside (q, q+1)).
inline ContextPtr make_context(int n, int q, const mpq_class& tol) {
  if (n < 2) throw domain_error("make_context: n must be >= 2");
  if (q < 1) throw domain_error("make_context: q must be >= 1");
  if (sgn(tol) <= 0) throw domain_error("make_context: tolerance must be positive");

  std::shared_ptr<BetaContext> ctx(new BetaContext());
  ctx->n_ = n;
  ctx->q_ = q;
  ctx->tol_ = tol;
  ctx->p_coeffs_.assign(static_cast<std::size_t>(n + 1), -q);
  ctx->p_coeffs_[0] = 1;
  ctx->p_poly_.assign(static_cast<std::size_t>(n + 1), mpq_class(-q));
  ctx->p_poly_[static_cast<std::size_t>(n)] = 1;

  // Certified bisection on (q, q+1): P(q) < 0 < P(q+1).
  mpq_class lo = q, hi = q + 1;
  const mpq_class quarter = tol / 4;
  while (hi - lo > quarter) {
    mpq_class mid = (lo + hi) / 2;
    if (sgn(ctx->eval_p(mid)) < 0)
      lo = mid;
    else
      hi = mid;
  }
  const mpq_class mid = (lo + hi) / 2;
  mpq_class half = tol / 2;
  while (mid - half <= q || mid + half >= q + 1) half /= 2;
  ctx->beta_lo_ = mid - half;
  ctx->beta_hi_ = mid + half;
  if (!(sgn(ctx->eval_p(ctx->beta_lo_)) < 0 && sgn(ctx->eval_p(ctx->beta_hi_)) > 0))
    throw convergence_error("make_context: enclosure certificate failed");

  // Fixed-point levels used by sign decisions.
  const double guess = mid.get_d();
  ctx->levels_.push_back(detail::make_level(n, q, 256, guess));
  ctx->levels_.push_back(detail::make_level(n, q, 1024, guess));
  const auto& fine = ctx->levels_.back();
  const mpz_class denom = mpz_class(1) << fine.bits;
  ctx->beta_float_ = detail::nearest_double(mpq_class(fine.root, denom));
  ctx->beta_pow_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    ctx->beta_pow_[static_cast<std::size_t>(i)] = detail::nearest_double(mpq_class(fine.lo[static_cast<std::size_t>(i)], denom));

  // beta^{-1} = (beta^{n-1} - q(beta^{n-2} + ... + 1)) / q
  ctx->inv_beta_.assign(static_cast<std::size_t>(n), mpq_class(-1));
  ctx->inv_beta_[static_cast<std::size_t>(n - 1)] = mpq_class(1, q);

  ctx->pisot_ = detail::compute_pisot(*ctx);
  ctx->irreducible_ = ctx->pisot_.all_inside_unit_disk;
  return ctx;
}

inline ContextPtr make_context(int n, int q, double tol = 1e-30) {
  if (!(tol > 0) || !std::isfinite(tol)) throw domain_error("make_context: tolerance must be positive");
  return make_context(n, q, mpq_class(tol));
}

/// All n roots of P_{n,q} with inclusion radii; fails if any radius exceeds tol.
inline PisotReport all_roots(const BetaContext& ctx, double tol = 1e-12) {
  PisotReport rep = detail::compute_pisot(ctx);
  if (rep.beta_root.radius > tol)
    throw convergence_error("all_roots: beta root radius exceeds tolerance");
  for (const auto& r : rep.other_roots)
    if (r.radius > tol) throw convergence_error("all_roots: root radius exceeds tolerance");
  return rep;
}

inline std::string BetaContext::beta_decimal(int digits) const {
  const auto& lv = levels_.back();
  mpz_class pow10;
  mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(digits));
  // midpoint of (root, root+1) / 2^bits
  mpz_class num = (2 * lv.root + 1) * pow10;
  mpz_class den = mpz_class(1) << (lv.bits + 1);
  return detail::fixed_decimal(detail::round_div(num, den), digits);
}

/// Element of Q(beta) in the power basis 1, beta, ..., beta^{n-1}.
class AlgNum {
 public:
  AlgNum() = default;
  AlgNum(ContextPtr ctx, const mpq_class& r) : ctx_(std::move(ctx)) {
    require_ctx();
    c_.assign(static_cast<std::size_t>(ctx_->n()), mpq_class(0));
    c_[0] = r;
    c_[0].canonicalize();
  }
  AlgNum(ContextPtr ctx, long r) : AlgNum(std::move(ctx), mpq_class(r)) {}
  /// Any coefficient vector; entries of degree >= n are reduced modulo P.
  AlgNum(ContextPtr ctx, std::vector<mpq_class> coeffs) : ctx_(std::move(ctx)), c_(std::move(coeffs)) {
    require_ctx();
    for (auto& x : c_) x.canonicalize();
    reduce();
  }

  static AlgNum beta(const ContextPtr& ctx) {
    std::vector<mpq_class> c(static_cast<std::size_t>(ctx->n()));
    if (ctx->n() > 1) c[1] = 1;
    return AlgNum(ctx, std::move(c));
  }
  static AlgNum inv_beta(const ContextPtr& ctx) { return AlgNum(ctx, ctx->inv_beta_coeffs()); }
  /// beta^k for any integer k.
  static AlgNum beta_pow(const ContextPtr& ctx, int k) {
    AlgNum r(ctx, 1L);
    for (int i = 0; i < k; ++i) r = r.mul_beta();
    for (int i = 0; i < -k; ++i) r = r.div_beta();
    return r;
  }

  const std::vector<mpq_class>& coeffs() const noexcept { return c_; }
  const BetaContext& context() const {
    require_ctx();
    return *ctx_;
  }
  const ContextPtr& context_ptr() const noexcept { return ctx_; }
  bool has_context() const noexcept { return static_cast<bool>(ctx_); }

  AlgNum mul_beta() const {
    const int n = ctx_->n();
    AlgNum r = *this;
    const mpq_class top = c_[static_cast<std::size_t>(n - 1)];
    for (int i = n - 1; i >= 1; --i) r.c_[static_cast<std::size_t>(i)] = c_[static_cast<std::size_t>(i - 1)];
    r.c_[0] = 0;
    if (sgn(top) != 0) {
      const mpq_class t = ctx_->q() * top;
      for (auto& x : r.c_) x += t;
    }
    return r;
  }

  AlgNum div_beta() const {
    const int n = ctx_->n();
    AlgNum r = *this;
    for (int i = 0; i + 1 < n; ++i) r.c_[static_cast<std::size_t>(i)] = c_[static_cast<std::size_t>(i + 1)];
    r.c_[static_cast<std::size_t>(n - 1)] = 0;
    if (sgn(c_[0]) != 0) {
      const auto& inv = ctx_->inv_beta_coeffs();
      for (int i = 0; i < n; ++i) r.c_[static_cast<std::size_t>(i)] += c_[0] * inv[static_cast<std::size_t>(i)];
    }
    return r;
  }

  AlgNum operator-() const {
    AlgNum r = *this;
    for (auto& x : r.c_) x = -x;
    return r;
  }
  AlgNum& operator+=(const AlgNum& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  AlgNum& operator-=(const AlgNum& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  AlgNum& operator*=(const AlgNum& o) {
    check_same(o);
    const std::size_t n = c_.size();
    std::vector<mpq_class> prod(2 * n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (sgn(c_[i]) == 0) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (sgn(o.c_[j]) != 0) prod[i + j] += c_[i] * o.c_[j];
    }
    c_ = std::move(prod);
    reduce();
    return *this;
  }
  AlgNum& operator/=(const AlgNum& o) {
    check_same(o);
    return *this *= o.inverse();
  }
  AlgNum& operator+=(const mpq_class& r) {
    c_[0] += r;
    return *this;
  }
  AlgNum& operator-=(const mpq_class& r) {
    c_[0] -= r;
    return *this;
  }
  AlgNum& operator*=(const mpq_class& r) {
    for (auto& x : c_) x *= r;
    return *this;
  }
  AlgNum& operator/=(const mpq_class& r) {
    if (sgn(r) == 0) throw zero_division_error("AlgNum: division by zero rational");
    for (auto& x : c_) x /= r;
    return *this;
  }

  friend AlgNum operator+(AlgNum a, const AlgNum& b) { return a += b; }
  friend AlgNum operator-(AlgNum a, const AlgNum& b) { return a -= b; }
  friend AlgNum operator*(AlgNum a, const AlgNum& b) { return a *= b; }
  friend AlgNum operator/(AlgNum a, const AlgNum& b) { return a /= b; }
  friend AlgNum operator+(AlgNum a, const mpq_class& b) { return a += b; }
  friend AlgNum operator-(AlgNum a, const mpq_class& b) { return a -= b; }
  friend AlgNum operator*(AlgNum a, const mpq_class& b) { return a *= b; }
  friend AlgNum operator/(AlgNum a, const mpq_class& b) { return a /= b; }
  friend AlgNum operator+(AlgNum a, long b) { return a += mpq_class(b); }
  friend AlgNum operator-(AlgNum a, long b) { return a -= mpq_class(b); }
  friend AlgNum operator*(AlgNum a, long b) { return a *= mpq_class(b); }

  /// Multiplicative inverse; throws zero_division_error when the value is 0.
  AlgNum inverse() const {
    if (is_zero()) throw zero_division_error("AlgNum: division by zero");
    const auto& p = ctx_->p_poly();
    auto [g, s] = qpoly::ext_gcd(c_, p);
    if (qpoly::degree(g) > 0) {
      // Only reachable for a reducible P: invert modulo the cofactor that
      // still vanishes at beta.
      const auto h = qpoly::divmod(p, g).first;
      const auto a = qpoly::divmod(c_, h).second;
      std::tie(g, s) = qpoly::ext_gcd(a, h);
      if (qpoly::degree(g) != 0) throw zero_division_error("AlgNum: zero divisor");
    }
    return AlgNum(ctx_, std::move(s));
  }

  bool coeffs_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](const mpq_class& x) { return sgn(x) == 0; });
  }

  /// True iff the value at beta is 0. Uses the gcd with P when P is not known
  /// to be irreducible.
  bool is_zero() const {
    require_ctx();
    if (coeffs_zero()) return true;
    if (ctx_->irreducible()) return false;
    return vanishes_at_beta(*ctx_, c_);
  }

  /// Does the polynomial g(x) (any degree) vanish at beta? gcd(g, P) is
  /// squarefree and beta is the only root of P inside the enclosure, so a
  /// sign change of the gcd across the enclosure decides it.
  static bool vanishes_at_beta(const BetaContext& ctx, const qpoly::poly& g) {
    if (qpoly::is_zero(g)) return true;
    const auto d = qpoly::gcd(g, ctx.p_poly());
    if (qpoly::degree(d) <= 0) return false;
    return sgn(qpoly::eval(d, ctx.beta_lo())) * sgn(qpoly::eval(d, ctx.beta_hi())) < 0;
  }

  struct Approx {
    double value;
    double error;
  };

  /// Double-precision estimate with a rigorous absolute error bound.
  Approx approx() const {
    const auto& bp = ctx_->beta_powers();
    double s = 0, mag = 0;
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (sgn(c_[i]) == 0) continue;
      const double t = c_[i].get_d() * bp[i];
      s += t;
      mag += std::fabs(t);
    }
    if (!std::isfinite(s) || !std::isfinite(mag)) return {s, INFINITY};
    const double eps = 0x1p-52;
    return {s, mag * (static_cast<double>(c_.size()) + 6) * eps + 0x1p-1000};
  }

  int sign() const {
    require_ctx();
    if (coeffs_zero()) return 0;
    const auto ap = approx();
    if (std::fabs(ap.value) > ap.error) return ap.value > 0 ? 1 : -1;
    if (!ctx_->irreducible() && is_zero()) return 0;
    std::vector<mpz_class> a;
    mpz_class den;
    integer_coeffs(a, den);
    std::size_t need = 0;
    for (const auto& x : a) need = std::max(need, detail::bit_size(x));
    unsigned bits = static_cast<unsigned>(std::max<std::size_t>(256, need + 64));
    detail::FixedLevel scratch;
    for (int round = 0; round < 12; ++round, bits *= 4) {
      const auto& lv = ctx_->level(bits, scratch);
      mpz_class lo, hi;
      bounds(a, lv, lo, hi);
      if (sgn(lo) > 0) return 1;
      if (sgn(hi) < 0) return -1;
    }
    throw convergence_error("AlgNum::sign: undecided after enclosure refinement");
  }

  /// Correctly scaled double value (error at most one ulp of truncation).
  double to_double() const {
    require_ctx();
    if (coeffs_zero()) return 0.0;
    mpq_class v = rational_estimate(60);
    return detail::nearest_double(v);
  }

  /// Rounded decimal string with `digits` places after the point.
  std::string to_decimal(int digits = 30) const {
    require_ctx();
    mpq_class v = rational_estimate(static_cast<unsigned>(digits * 3.33) + 64);
    mpz_class pow10;
    mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(digits));
    mpq_class scaled = v * pow10;
    return detail::fixed_decimal(detail::round_div(scaled.get_num(), scaled.get_den()), digits);
  }

  /// floor of the value.
  long floor() const {
    require_ctx();
    const auto ap = approx();
    if (ap.error < 0.25) {
      const double lo = std::floor(ap.value - ap.error), hi = std::floor(ap.value + ap.error);
      if (lo == hi && std::fabs(lo) < 1e15) return static_cast<long>(lo);
    }
    const double d = to_double();
    long k = static_cast<long>(std::floor(d));
    while ((*this - k).sign() < 0) --k;
    while ((*this - (k + 1)).sign() >= 0) ++k;
    return k;
  }

  bool is_rational() const {
    for (std::size_t i = 1; i < c_.size(); ++i)
      if (sgn(c_[i]) != 0) return false;
    return true;
  }

  /// Largest numerator or denominator bit size among the coefficients.
  std::size_t max_bits() const {
    std::size_t b = 0;
    for (const auto& x : c_)
      b = std::max({b, detail::bit_size(x.get_num()), detail::bit_size(x.get_den())});
    return b;
  }

  friend bool operator==(const AlgNum& a, const AlgNum& b) {
    a.check_same(b);
    if (a.c_ == b.c_) return true;
    if (a.ctx_->irreducible()) return false;
    return (a - b).is_zero();
  }
  friend int compare(const AlgNum& a, const AlgNum& b) { return (a - b).sign(); }
  friend bool operator<(const AlgNum& a, const AlgNum& b) { return compare(a, b) < 0; }
  friend bool operator>(const AlgNum& a, const AlgNum& b) { return compare(a, b) > 0; }
  friend bool operator<=(const AlgNum& a, const AlgNum& b) { return compare(a, b) <= 0; }
  friend bool operator>=(const AlgNum& a, const AlgNum& b) { return compare(a, b) >= 0; }

  friend std::ostream& operator<<(std::ostream& os, const AlgNum& a) {
    os << '[';
    for (std::size_t i = 0; i < a.c_.size(); ++i) os << (i ? ", " : "") << a.c_[i];
    return os << ']';
  }

 private:
  void require_ctx() const {
    if (!ctx_) throw domain_error("AlgNum: no context");
  }
  void check_same(const AlgNum& o) const {
    require_ctx();
    o.require_ctx();
    if (ctx_ != o.ctx_ && (ctx_->n() != o.ctx_->n() || ctx_->q() != o.ctx_->q()))
      throw mode_mismatch_error("AlgNum: operands from different contexts");
  }

  void reduce() {
    const int n = ctx_->n();
    const int q = ctx_->q();
    // beta^d = q (beta^{d-1} + ... + beta^{d-n}) for d >= n
    for (int d = static_cast<int>(c_.size()) - 1; d >= n; --d) {
      const mpq_class top = c_[static_cast<std::size_t>(d)];
      if (sgn(top) == 0) continue;
      const mpq_class t = q * top;
      for (int i = d - n; i < d; ++i) c_[static_cast<std::size_t>(i)] += t;
    }
    c_.resize(static_cast<std::size_t>(n));
  }

  void integer_coeffs(std::vector<mpz_class>& a, mpz_class& den) const {
    den = 1;
    for (const auto& x : c_) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), x.get_den_mpz_t());
    a.resize(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) a[i] = c_[i].get_num() * (den / c_[i].get_den());
  }

  static void bounds(const std::vector<mpz_class>& a, const detail::FixedLevel& lv, mpz_class& lo, mpz_class& hi) {
    lo = 0;
    hi = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (sgn(a[i]) >= 0) {
        lo += a[i] * lv.lo[i];
        hi += a[i] * lv.hi[i];
      } else {
        lo += a[i] * lv.hi[i];
        hi += a[i] * lv.lo[i];
      }
    }
  }

  // Rational within 2^-extra_bits relative-ish accuracy of the value.
  mpq_class rational_estimate(unsigned extra_bits) const {
    std::vector<mpz_class> a;
    mpz_class den;
    integer_coeffs(a, den);
    std::size_t need = 0;
    for (const auto& x : a) need = std::max(need, detail::bit_size(x));
    detail::FixedLevel scratch;
    const auto& lv = ctx_->level(static_cast<unsigned>(need) + extra_bits + 64, scratch);
    mpz_class lo, hi;
    bounds(a, lv, lo, hi);
    mpq_class v(lo + hi, den * (mpz_class(1) << (lv.bits + 1)));
    v.canonicalize();
    return v;
  }

  ContextPtr ctx_;
  std::vector<mpq_class> c_;
};

}  // namespace betaexp
