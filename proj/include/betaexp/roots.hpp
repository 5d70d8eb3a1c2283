#pragma once

// Simultaneous polynomial root finding (Aberth-Ehrlich) with inclusion radii.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "betaexp/errors.hpp"

namespace betaexp::roots {

using cld = std::complex<long double>;

struct RootEstimate {
  cld value;
  /// Radius of a disk around value certified to contain a root.
  long double radius = 0;
};

namespace detail {

// Horner evaluation of p and p' (coefficients lowest degree first) together
// with a running bound on the rounding error of p(z).
struct HornerResult {
  cld p, dp;
  long double err;
};

inline HornerResult horner(const std::vector<long double>& c, cld z) {
  cld p = 0, dp = 0;
  long double mag = 0;
  const long double az = std::abs(z);
  for (std::size_t i = c.size(); i-- > 0;) {
    dp = dp * z + p;
    p = p * z + c[i];
    mag = mag * az + std::abs(c[i]);
  }
  const long double eps = std::numeric_limits<long double>::epsilon();
  return {p, dp, 4 * static_cast<long double>(c.size() + 1) * eps * mag};
}

}  // namespace detail

/// All roots of the polynomial with real coefficients `c` (lowest degree
/// first, leading coefficient nonzero). Each estimate carries the radius
/// n*(|p(z)|+err)/|p'(z)|, the classical inclusion disk for polynomials.
inline std::vector<RootEstimate> aberth(const std::vector<long double>& c, int max_iter = 2000) {
  const int n = static_cast<int>(c.size()) - 1;
  if (n < 1 || c.back() == 0) throw domain_error("aberth: polynomial of degree >= 1 required");

  // Initial guesses on a circle whose radius is the geometric mean of the
  // root moduli, rotated off the real axis.
  const long double r0 = std::pow(std::abs(c.front() / c.back()), 1.0L / n);
  const long double rad = r0 > 0 ? r0 : 1.0L;
  std::vector<cld> z(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const long double th = 2 * std::numbers::pi_v<long double> * k / n + 0.4L;
    z[static_cast<std::size_t>(k)] = std::polar(rad * (1 + 0.01L * k), th);
  }

  const long double eps = std::numeric_limits<long double>::epsilon();
  bool converged = false;
  for (int it = 0; it < max_iter && !converged; ++it) {
    long double max_step = 0;
    for (int k = 0; k < n; ++k) {
      auto& zk = z[static_cast<std::size_t>(k)];
      const auto h = detail::horner(c, zk);
      if (std::abs(h.p) <= h.err) continue;
      const cld w = h.p / h.dp;
      cld s = 0;
      for (int j = 0; j < n; ++j)
        if (j != k) s += 1.0L / (zk - z[static_cast<std::size_t>(j)]);
      const cld step = w / (1.0L - w * s);
      zk -= step;
      max_step = std::max(max_step, std::abs(step) / std::max(1.0L, std::abs(zk)));
    }
    converged = max_step < 16 * eps;
  }

  std::vector<RootEstimate> out;
  out.reserve(static_cast<std::size_t>(n));
  for (auto zk : z) {
    // two Newton polishing steps
    for (int i = 0; i < 2; ++i) {
      const auto h = detail::horner(c, zk);
      if (h.dp != cld(0)) zk -= h.p / h.dp;
    }
    const auto h = detail::horner(c, zk);
    if (h.dp == cld(0)) throw convergence_error("aberth: vanishing derivative at root estimate");
    out.push_back({zk, static_cast<long double>(n) * (std::abs(h.p) + h.err) / std::abs(h.dp)});
  }
  if (!converged) {
    const bool tight = std::all_of(out.begin(), out.end(), [&](const RootEstimate& r) {
      return r.radius <= 1e-12L * std::max(1.0L, std::abs(r.value));
    });
    if (!tight) throw convergence_error("aberth: root refinement did not converge");
  }
  return out;
}

/// True when the inclusion disks are pairwise disjoint, which certifies that
/// each contains exactly one root, i.e. all roots are simple.
inline bool disks_disjoint(const std::vector<RootEstimate>& r) {
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = i + 1; j < r.size(); ++j)
      if (std::abs(r[i].value - r[j].value) <= r[i].radius + r[j].radius) return false;
  return true;
}

}  // namespace betaexp::roots
