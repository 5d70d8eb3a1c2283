#pragma once

// Uniform arithmetic helpers over the scalar types used for breakpoints and
// values: AlgNum (exact), double, 256-bit binary floats and complex doubles.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <utility>

#include "betaexp/algnum.hpp"

namespace betaexp {

using hp_float = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<256, boost::multiprecision::digit_base_2>, boost::multiprecision::et_off>;
using cplx = std::complex<double>;

/// Absolute tolerance under which float breakpoints are identified.
inline constexpr double kFloatBreakTol = 1e-12;

namespace detail {

inline hp_float hp_from_rational(const mpq_class& r) {
  return hp_float(r.get_num().get_str()) / hp_float(r.get_den().get_str());
}

inline hp_float hp_beta(const BetaContext& ctx) {
  thread_local std::map<std::pair<int, int>, hp_float> cache;
  auto key = std::make_pair(ctx.n(), ctx.q());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  detail::FixedLevel scratch;
  const auto& lv = ctx.level(1024, scratch);
  hp_float b = boost::multiprecision::ldexp(hp_float(lv.root.get_str()), -static_cast<int>(lv.bits));
  cache.emplace(key, b);
  return b;
}

}  // namespace detail

template <class T>
struct Arith;

template <>
struct Arith<AlgNum> {
  static constexpr bool exact = true;
  static AlgNum from_long(const ContextPtr& c, long v) { return AlgNum(c, v); }
  static AlgNum mul_beta(const ContextPtr&, const AlgNum& a) { return a.mul_beta(); }
  static AlgNum div_beta(const ContextPtr&, const AlgNum& a) { return a.div_beta(); }
  static bool eq(const AlgNum& a, const AlgNum& b) { return a == b; }
  static bool is_zero(const AlgNum& a) { return a.is_zero(); }
  static double to_double(const AlgNum& a) { return a.to_double(); }
  static double magnitude(const AlgNum& a) { return std::fabs(a.to_double()); }
  static AlgNum conj(const AlgNum& a) { return a; }
};

template <>
struct Arith<double> {
  static constexpr bool exact = false;
  static double from_long(const ContextPtr&, long v) { return static_cast<double>(v); }
  static double mul_beta(const ContextPtr& c, double a) { return a * c->beta_float(); }
  static double div_beta(const ContextPtr& c, double a) { return a / c->beta_float(); }
  static bool eq(double a, double b) { return a == b; }
  static bool is_zero(double a) { return a == 0; }
  static double to_double(double a) { return a; }
  static double magnitude(double a) { return std::fabs(a); }
  static double conj(double a) { return a; }
};

template <>
struct Arith<hp_float> {
  static constexpr bool exact = false;
  static hp_float from_long(const ContextPtr&, long v) { return hp_float(v); }
  static hp_float mul_beta(const ContextPtr& c, const hp_float& a) { return a * detail::hp_beta(*c); }
  static hp_float div_beta(const ContextPtr& c, const hp_float& a) { return a / detail::hp_beta(*c); }
  static bool eq(const hp_float& a, const hp_float& b) { return a == b; }
  static bool is_zero(const hp_float& a) { return a == 0; }
  static double to_double(const hp_float& a) { return a.convert_to<double>(); }
  static double magnitude(const hp_float& a) { return std::fabs(a.convert_to<double>()); }
  static hp_float conj(const hp_float& a) { return a; }
};

template <>
struct Arith<cplx> {
  static constexpr bool exact = false;
  static cplx from_long(const ContextPtr&, long v) { return cplx(static_cast<double>(v)); }
  static cplx mul_beta(const ContextPtr& c, const cplx& a) { return a * c->beta_float(); }
  static cplx div_beta(const ContextPtr& c, const cplx& a) { return a / c->beta_float(); }
  static bool eq(const cplx& a, const cplx& b) { return a == b; }
  static bool is_zero(const cplx& a) { return a == cplx(0); }
  static double to_double(const cplx& a) { return a.real(); }
  static double magnitude(const cplx& a) { return std::abs(a); }
  static cplx conj(const cplx& a) { return std::conj(a); }
};

/// Converts a breakpoint-typed quantity (a width, say) into the value type.
template <class V, class P>
V convert(const P& p);

template <>
inline AlgNum convert<AlgNum, AlgNum>(const AlgNum& p) { return p; }
template <>
inline double convert<double, double>(const double& p) { return p; }
template <>
inline double convert<double, AlgNum>(const AlgNum& p) { return p.to_double(); }
template <>
inline cplx convert<cplx, double>(const double& p) { return cplx(p); }
template <>
inline cplx convert<cplx, AlgNum>(const AlgNum& p) { return cplx(p.to_double()); }
template <>
inline cplx convert<cplx, cplx>(const cplx& p) { return p; }
template <>
inline hp_float convert<hp_float, hp_float>(const hp_float& p) { return p; }
template <>
inline hp_float convert<hp_float, double>(const double& p) { return hp_float(p); }
template <>
inline hp_float convert<hp_float, AlgNum>(const AlgNum& p) { return hp_float(p.to_decimal(90)); }
template <>
inline double convert<double, hp_float>(const hp_float& p) { return p.convert_to<double>(); }
template <>
inline cplx convert<cplx, hp_float>(const hp_float& p) { return cplx(p.convert_to<double>()); }

namespace detail {

// A breakpoint together with a double interval known to contain it; the
// interval settles most comparisons without exact arithmetic.
template <class P>
struct Keyed;

template <>
struct Keyed<AlgNum> {
  AlgNum v;
  double lo, hi;
  explicit Keyed(AlgNum a) : v(std::move(a)) {
    const auto ap = v.approx();
    lo = ap.value - ap.error;
    hi = ap.value + ap.error;
  }
  Keyed(AlgNum a, double l, double h) : v(std::move(a)), lo(l), hi(h) {}
  Keyed shifted(long j) const {
    const double dj = static_cast<double>(j);
    return Keyed(v - j, std::nextafter(lo - dj, -INFINITY), std::nextafter(hi - dj, INFINITY));
  }
};

template <>
struct Keyed<double> {
  double v;
  explicit Keyed(double a) : v(a) {}
  Keyed shifted(long j) const { return Keyed(v - static_cast<double>(j)); }
};

inline int cmp(const Keyed<AlgNum>& a, const Keyed<AlgNum>& b) {
  if (a.hi < b.lo) return -1;
  if (a.lo > b.hi) return 1;
  return compare(a.v, b.v);
}

inline int cmp(const Keyed<double>& a, const Keyed<double>& b) {
  const double d = a.v - b.v;
  if (std::fabs(d) <= kFloatBreakTol) return 0;
  return d < 0 ? -1 : 1;
}

}  // namespace detail

}  // namespace betaexp
