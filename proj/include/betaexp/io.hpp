#pragma once

// Locale-independent number formatting and the metadata block embedded in
// every CSV/JSON output.

#include <charconv>
#include <complex>
#include <cstdint>
#include <string>
#include <system_error>

#include <json.hpp>

#include "betaexp/algnum.hpp"

#ifndef BETAEXP_VERSION
#define BETAEXP_VERSION "0.1.0"
#endif

namespace betaexp::io {

inline constexpr const char* kVersion = BETAEXP_VERSION;

/// 17 significant digits, '.' separator, no locale.
inline std::string fmt(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

/// Shortest round-trip representation.
inline std::string fmt_short(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

/// 30 significant digits for beta-derived constants.
inline std::string fmt(const AlgNum& a) { return a.to_decimal(30); }

struct Meta {
  int n = 0, q = 0;
  std::string beta;
  std::string mode = "exact";
  std::uint64_t seed = 0;
  std::string version = kVersion;
};

inline Meta make_meta(const BetaContext& ctx, std::string mode, std::uint64_t seed) {
  return {ctx.n(), ctx.q(), ctx.beta_decimal(30), std::move(mode), seed, kVersion};
}

inline nlohmann::ordered_json to_json(const Meta& m) {
  nlohmann::ordered_json j;
  j["n"] = m.n;
  j["q"] = m.q;
  j["beta"] = m.beta;
  j["mode"] = m.mode;
  j["seed"] = m.seed;
  j["version"] = m.version;
  return j;
}

/// First line of every CSV file.
inline std::string csv_meta_line(const Meta& m) { return "# meta: " + to_json(m).dump() + "\n"; }

/// Parses "p/q", an integer or a decimal string into an exact rational.
/// `exact` is set when the input was written as p/q or as an integer.
inline mpq_class parse_rational(const std::string& s, bool& exact) {
  if (s.empty()) throw domain_error("empty number");
  const auto slash = s.find('/');
  mpq_class r;
  if (slash != std::string::npos) {
    mpz_class num, den;
    if (num.set_str(s.substr(0, slash), 10) != 0 || den.set_str(s.substr(slash + 1), 10) != 0)
      throw domain_error("malformed rational '" + s + "'");
    if (den == 0) throw domain_error("zero denominator in '" + s + "'");
    r = mpq_class(num, den);
    r.canonicalize();
    exact = true;
    return r;
  }
  // decimal: digits with optional sign, point and exponent
  std::size_t i = 0;
  bool neg = false;
  if (s[i] == '+' || s[i] == '-') neg = s[i++] == '-';
  std::string digits;
  long exp10 = 0;
  bool seen_point = false, any = false;
  for (; i < s.size() && s[i] != 'e' && s[i] != 'E'; ++i) {
    if (s[i] == '.' && !seen_point) {
      seen_point = true;
      continue;
    }
    if (s[i] < '0' || s[i] > '9') throw domain_error("malformed number '" + s + "'");
    digits += s[i];
    any = true;
    if (seen_point) --exp10;
  }
  if (!any) throw domain_error("malformed number '" + s + "'");
  if (i < s.size()) {
    long e = 0;
    const char* b = s.data() + i + 1;
    const char* end = s.data() + s.size();
    if (b < end && *b == '+') ++b;
    auto [p, ec] = std::from_chars(b, end, e);
    if (ec != std::errc() || p != end) throw domain_error("malformed exponent in '" + s + "'");
    exp10 += e;
  }
  mpz_class num(digits, 10), pow10 = 1;
  for (long k = 0; k < (exp10 < 0 ? -exp10 : exp10); ++k) pow10 *= 10;
  r = exp10 < 0 ? mpq_class(num, pow10) : mpq_class(num * pow10);
  r.canonicalize();
  if (neg) r = -r;
  exact = !seen_point && exp10 == 0;
  return r;
}

}  // namespace betaexp::io
