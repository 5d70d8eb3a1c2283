#pragma once

// Dense polynomials over Q, coefficients stored lowest degree first.

#include <gmpxx.h>

#include <cstddef>
#include <utility>
#include <vector>

#include "betaexp/errors.hpp"

namespace betaexp::qpoly {

using poly = std::vector<mpq_class>;

inline void trim(poly& p) {
  while (!p.empty() && sgn(p.back()) == 0) p.pop_back();
}

inline poly trimmed(poly p) {
  trim(p);
  return p;
}

/// Degree of p, or -1 for the zero polynomial.
inline int degree(const poly& p) {
  for (std::size_t i = p.size(); i-- > 0;)
    if (sgn(p[i]) != 0) return static_cast<int>(i);
  return -1;
}

inline bool is_zero(const poly& p) { return degree(p) < 0; }

inline poly sub(const poly& a, const poly& b) {
  poly r(std::max(a.size(), b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
  trim(r);
  return r;
}

inline poly mul(const poly& a, const poly& b) {
  if (is_zero(a) || is_zero(b)) return {};
  poly r(a.size() + b.size() - 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (sgn(a[i]) == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  }
  trim(r);
  return r;
}

/// Euclidean division a = quot * b + rem with deg rem < deg b.
inline std::pair<poly, poly> divmod(poly a, const poly& b) {
  const int db = degree(b);
  if (db < 0) throw domain_error("polynomial division by zero");
  trim(a);
  const int da = degree(a);
  if (da < db) return {poly{}, a};
  poly quot(static_cast<std::size_t>(da - db + 1));
  const mpq_class lead = b[static_cast<std::size_t>(db)];
  for (int d = da; d >= db; --d) {
    const mpq_class c = a[static_cast<std::size_t>(d)] / lead;
    if (sgn(c) == 0) continue;
    quot[static_cast<std::size_t>(d - db)] = c;
    for (int i = 0; i <= db; ++i) a[static_cast<std::size_t>(d - db + i)] -= c * b[static_cast<std::size_t>(i)];
  }
  trim(a);
  trim(quot);
  return {quot, a};
}

inline poly make_monic(poly p) {
  trim(p);
  if (p.empty()) return p;
  const mpq_class lead = p.back();
  for (auto& c : p) c /= lead;
  return p;
}

/// Monic gcd.
inline poly gcd(poly a, poly b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    auto r = divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return make_monic(a);
}

/// Returns (g, s) with s*a == g (mod m), g = monic gcd(a, m).
inline std::pair<poly, poly> ext_gcd(const poly& a, const poly& m) {
  poly r0 = trimmed(m), r1 = trimmed(a);
  poly s0{}, s1{mpq_class(1)};
  while (!r1.empty()) {
    auto [quot, rem] = divmod(r0, r1);
    poly s2 = sub(s0, mul(quot, s1));
    r0 = std::move(r1);
    r1 = std::move(rem);
    s0 = std::move(s1);
    s1 = std::move(s2);
  }
  if (r0.empty()) return {poly{}, poly{}};
  const mpq_class lead = r0.back();
  for (auto& c : r0) c /= lead;
  for (auto& c : s0) c /= lead;
  return {r0, s0};
}

inline mpq_class eval(const poly& p, const mpq_class& x) {
  mpq_class acc = 0;
  for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
  return acc;
}

}  // namespace betaexp::qpoly
