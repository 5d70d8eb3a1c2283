#pragma once

// Greedy beta-expansions: the map T(x) = beta*x - floor(beta*x), digit
// extraction, admissibility of digit strings and classification of
// eventually periodic representations.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "betaexp/algnum.hpp"

namespace betaexp {

namespace detail {

inline void require_unit_interval(const AlgNum& x) {
  if (x.sign() < 0 || (x - 1L).sign() >= 0) throw domain_error("x must lie in [0,1)");
}

inline void require_unit_interval(double x) {
  if (!(x >= 0.0 && x < 1.0)) throw domain_error("x must lie in [0,1)");
}

inline std::string coeff_key(const AlgNum& a) {
  std::string s;
  for (const auto& c : a.coeffs()) {
    s += c.get_str();
    s += ';';
  }
  return s;
}

}  // namespace detail

/// Digit j = floor(beta*x) and the image T(x) = beta*x - j.
struct Step {
  int digit;
  AlgNum image;
};

inline Step t_beta_step(const AlgNum& x) {
  detail::require_unit_interval(x);
  const AlgNum y = x.mul_beta();
  const long j = y.floor();
  return {static_cast<int>(j), y - j};
}

inline AlgNum t_beta(const AlgNum& x) { return t_beta_step(x).image; }

struct FloatStep {
  int digit;
  double image;
};

/// Float branch of T. Near a branch point j/beta the floor is settled in
/// exact arithmetic on the (exactly representable) double x.
inline FloatStep t_beta_step(const ContextPtr& ctx, double x) {
  detail::require_unit_interval(x);
  const double beta = ctx->beta_float();
  const double y = beta * x;
  int j = static_cast<int>(std::floor(y));
  if (std::fabs(y - std::nearbyint(y)) < 1e-12) j = static_cast<int>(AlgNum(ctx, mpq_class(x)).mul_beta().floor());
  double img = std::fma(beta, x, -static_cast<double>(j));
  if (img < 0) img = 0;
  if (img >= 1) img = std::nextafter(1.0, 0.0);
  return {j, img};
}

inline double t_beta(const ContextPtr& ctx, double x) { return t_beta_step(ctx, x).image; }

struct DigitSeq {
  std::vector<int> digits;
  /// T^k(x) after the k listed digits (exact mode).
  std::optional<AlgNum> tail_remainder;
  /// T^k(x) in float mode.
  double float_remainder = 0;
};

inline DigitSeq greedy_digits(const AlgNum& x, int count) {
  if (count < 1) throw domain_error("greedy_digits: count must be >= 1");
  DigitSeq out;
  out.digits.reserve(static_cast<std::size_t>(count));
  AlgNum r = x;
  for (int k = 0; k < count; ++k) {
    auto s = t_beta_step(r);
    out.digits.push_back(s.digit);
    r = std::move(s.image);
  }
  out.float_remainder = r.to_double();
  out.tail_remainder = std::move(r);
  return out;
}

inline DigitSeq greedy_digits(const ContextPtr& ctx, double x, int count) {
  if (count < 1) throw domain_error("greedy_digits: count must be >= 1");
  DigitSeq out;
  double r = x;
  for (int k = 0; k < count; ++k) {
    auto s = t_beta_step(ctx, r);
    out.digits.push_back(s.digit);
    r = s.image;
  }
  out.float_remainder = r;
  return out;
}

/// x, T(x), ..., T^count(x).
inline std::vector<AlgNum> orbit(const AlgNum& x, int count) {
  std::vector<AlgNum> out{x};
  for (int k = 0; k < count; ++k) out.push_back(t_beta(out.back()));
  return out;
}

inline std::vector<double> orbit(const ContextPtr& ctx, double x, int count) {
  std::vector<double> out{x};
  for (int k = 0; k < count; ++k) out.push_back(t_beta(ctx, out.back()));
  return out;
}

/// sum_{j=1}^{k} d_j beta^{-j}
inline AlgNum digit_value(const ContextPtr& ctx, const std::vector<int>& d) {
  AlgNum acc(ctx, 0L);
  for (auto it = d.rbegin(); it != d.rend(); ++it) acc = (acc + static_cast<long>(*it)).div_beta();
  return acc;
}

/// (c_1, ..., c_length): q-1 at multiples of n, q elsewhere.
inline std::vector<int> quasi_tail(const BetaContext& ctx, int length) {
  if (length < 1) throw domain_error("quasi_tail: length must be >= 1");
  std::vector<int> c(static_cast<std::size_t>(length));
  for (int j = 1; j <= length; ++j) c[static_cast<std::size_t>(j - 1)] = (j % ctx.n() == 0) ? ctx.q() - 1 : ctx.q();
  return c;
}

enum class Validity { Valid, Suspect, Invalid };

inline const char* to_string(Validity v) {
  switch (v) {
    case Validity::Valid: return "valid";
    case Validity::Suspect: return "suspect";
    default: return "invalid";
  }
}

struct ValidityReport {
  Validity status = Validity::Valid;
  int restriction = 0;  // 1, 2 or 3 when not valid
  std::size_t index = 0;  // 1-based position where the offending run starts
  std::string message;
  bool ok() const { return status != Validity::Invalid; }
};

/// Checks digit range, runs of n digits equal to q, and whether the window
/// ends in a long quasi-tail prefix (reported as suspect: a finite window
/// cannot prove the infinite tail).
inline ValidityReport validate_digits(const BetaContext& ctx, const std::vector<int>& d) {
  const int n = ctx.n(), q = ctx.q();
  ValidityReport rep;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] < 0 || d[i] > q) {
      rep.status = Validity::Invalid;
      rep.restriction = 1;
      rep.index = i + 1;
      rep.message = "digit " + std::to_string(d[i]) + " outside {0,...," + std::to_string(q) + "}";
      return rep;
    }
  int run = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    run = d[i] == q ? run + 1 : 0;
    if (run == n) {
      rep.status = Validity::Invalid;
      rep.restriction = 2;
      rep.index = i + 2 - static_cast<std::size_t>(n);
      rep.message = std::to_string(n) + " consecutive digits equal to " + std::to_string(q);
      return rep;
    }
  }
  // longest suffix of the form c_1 c_2 ... c_L
  for (std::size_t s = 0; s < d.size(); ++s) {
    const std::size_t len = d.size() - s;
    if (len < static_cast<std::size_t>(2 * n)) break;
    const auto c = quasi_tail(ctx, static_cast<int>(len));
    if (std::equal(c.begin(), c.end(), d.begin() + static_cast<std::ptrdiff_t>(s))) {
      rep.status = Validity::Suspect;
      rep.restriction = 3;
      rep.index = s + 1;
      rep.message = "window ends in " + std::to_string(len) + " digits of the quasi-greedy tail";
      return rep;
    }
  }
  return rep;
}

enum class RepresentationCase { UnitValue, GreedyIdentical, NonGreedyWithQuasiTail };

inline const char* to_string(RepresentationCase c) {
  switch (c) {
    case RepresentationCase::UnitValue: return "UnitValue";
    case RepresentationCase::GreedyIdentical: return "GreedyIdentical";
    default: return "NonGreedyWithQuasiTail";
  }
}

struct ClassificationResult {
  RepresentationCase kind;
  std::optional<int> k;
  std::optional<std::vector<int>> greedy;
  AlgNum value;
};

namespace detail {

// Eventually periodic digit sequence: preamble, then period repeated.
struct PeriodicDigits {
  std::vector<int> pre, per;
  int at(std::size_t j) const {  // 0-based
    if (j < pre.size()) return pre[j];
    if (per.empty()) return 0;
    return per[(j - pre.size()) % per.size()];
  }
};

// Greedy expansion of x as an eventually periodic sequence (the orbit of an
// element of Q(beta) under T is finite since beta is Pisot).
inline PeriodicDigits greedy_periodic(const AlgNum& x, std::size_t budget = 200000) {
  std::map<std::string, std::size_t> seen;
  std::vector<int> digits;
  AlgNum r = x;
  for (std::size_t k = 0; k <= budget; ++k) {
    auto [it, fresh] = seen.emplace(coeff_key(r), k);
    if (!fresh) {
      const std::size_t start = it->second;
      return {std::vector<int>(digits.begin(), digits.begin() + static_cast<std::ptrdiff_t>(start)),
              std::vector<int>(digits.begin() + static_cast<std::ptrdiff_t>(start), digits.end())};
    }
    auto s = t_beta_step(r);
    digits.push_back(s.digit);
    r = std::move(s.image);
  }
  throw resource_error("greedy expansion period exceeds budget");
}

}  // namespace detail

/// Value of the eventually periodic representation (preamble; period...).
inline AlgNum periodic_value(const ContextPtr& ctx, const std::vector<int>& preamble, const std::vector<int>& period) {
  AlgNum x = digit_value(ctx, preamble);
  if (!period.empty()) {
    const auto L = static_cast<int>(period.size());
    const AlgNum block = digit_value(ctx, period);
    const AlgNum tail = block / (AlgNum(ctx, 1L) - AlgNum::beta_pow(ctx, -L));
    x += tail * AlgNum::beta_pow(ctx, -static_cast<int>(preamble.size()));
  }
  return x;
}

/// Sorts a representation into the three cases of the admissibility lemma.
inline ClassificationResult classify_representation(const ContextPtr& ctx, const std::vector<int>& preamble,
                                                    const std::vector<int>& period) {
  const int n = ctx->n(), q = ctx->q();
  detail::PeriodicDigits d{preamble, period};
  // Restrictions 1 and 2 on the infinite sequence: a window covering the
  // preamble plus n+1 periods sees every run.
  const std::size_t window = preamble.size() + (period.size() + 1) * static_cast<std::size_t>(n + 1);
  std::vector<int> seen;
  for (std::size_t j = 0; j < window; ++j) seen.push_back(d.at(j));
  const auto v = validate_digits(*ctx, seen);
  if (v.status == Validity::Invalid)
    throw domain_error("classify_representation: restriction " + std::to_string(v.restriction) + " violated at index " +
                       std::to_string(v.index));
  if (!period.empty() && std::all_of(period.begin(), period.end(), [&](int x) { return x == q; }))
    throw domain_error("classify_representation: restriction 2 violated by the period");

  ClassificationResult res{RepresentationCase::GreedyIdentical, std::nullopt, std::nullopt,
                           periodic_value(ctx, preamble, period)};
  const int cmp1 = (res.value - 1L).sign();
  if (cmp1 == 0) {
    res.kind = RepresentationCase::UnitValue;
    return res;
  }
  if (cmp1 > 0) throw domain_error("classify_representation: value exceeds 1");

  const auto g = detail::greedy_periodic(res.value);
  const std::size_t lp = std::max<std::size_t>(1, d.per.size()), lg = std::max<std::size_t>(1, g.per.size());
  const std::size_t span = std::max(d.pre.size(), g.pre.size()) + std::lcm(lp, lg) + 1;
  std::size_t k = 0;
  while (k < span && d.at(k) == g.at(k)) ++k;
  if (k == span) return res;

  // first disagreement at 1-based index k+1
  bool tail_ok = d.at(k) == g.at(k) - 1;
  const std::size_t check = k + 1 + span * static_cast<std::size_t>(n) + static_cast<std::size_t>(n);
  for (std::size_t j = k + 1; tail_ok && j < check; ++j) {
    const std::size_t idx = j - k;  // c index
    const int c = (idx % static_cast<std::size_t>(n) == 0) ? q - 1 : q;
    tail_ok = d.at(j) == c;
  }
  if (!tail_ok) throw std::logic_error("classify_representation: representation fits none of the three cases");
  std::vector<int> greedy;
  for (std::size_t j = 0; j <= k; ++j) greedy.push_back(g.at(j));
  res.kind = RepresentationCase::NonGreedyWithQuasiTail;
  res.k = static_cast<int>(k + 1);
  res.greedy = std::move(greedy);
  return res;
}

}  // namespace betaexp
