#pragma once

// The numbered acceptance checks, shared by the acceptance test binary and
// the `selftest` subcommand of the CLI.

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "betaexp/expansion.hpp"
#include "betaexp/layers.hpp"
#include "betaexp/pexp.hpp"
#include "betaexp/stochastic.hpp"

namespace betaexp::selftest {

struct Result {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0;
  double budget_seconds = 0;
};

namespace detail {

struct Check {
  bool ok = true;
  std::ostringstream msg;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) msg << "first failure: " << what << "; ";
    ok = ok && cond;
  }
};

inline std::string sci(double x) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << x;
  return s.str();
}

inline Result c1_beta() {
  Check c;
  double worst_p = 0, worst_closed = 0;
  for (int n = 2; n <= 8; ++n)
    for (int q = 1; q <= 5; ++q) {
      auto ctx = make_context(n, q);
      const std::string tag = "(" + std::to_string(n) + "," + std::to_string(q) + ")";
      c.require(ctx->beta_lo() > q && ctx->beta_hi() < q + 1, tag + " beta outside (q, q+1)");
      const mpq_class mid = (ctx->beta_lo() + ctx->beta_hi()) / 2;
      const double pv = std::fabs(ctx->eval_p(mid).get_d());
      worst_p = std::max(worst_p, pv);
      c.require(pv <= 1e-12, tag + " |P(beta)| = " + sci(pv));
      if (n == 2) {
        const double closed = (q + std::sqrt(double(q) * q + 4.0 * q)) / 2;
        const double d = std::fabs(ctx->beta_float() - closed);
        worst_closed = std::max(worst_closed, d);
        c.require(d <= 1e-13, tag + " closed form mismatch " + sci(d));
      }
    }
  c.msg << "max |P(beta)| = " << sci(worst_p) << ", max closed-form gap = " << sci(worst_closed);
  return {1, "beta fixtures", c.ok, c.msg.str()};
}

inline Result c2_pisot() {
  Check c;
  double min_margin = 1;
  for (int n = 2; n <= 8; ++n)
    for (int q = 1; q <= 5; ++q) {
      auto ctx = make_context(n, q);
      const auto rep = all_roots(*ctx);
      const std::string tag = "(" + std::to_string(n) + "," + std::to_string(q) + ")";
      c.require(rep.passed(), tag + " report failed");
      c.require(static_cast<int>(rep.other_roots.size()) == n - 1, tag + " root count");
      for (const auto& r : rep.other_roots) {
        const double m = static_cast<double>(std::abs(r.value));
        c.require(rep.annulus_lo < m && m < 1, tag + " root modulus " + std::to_string(m));
        min_margin = std::min({min_margin, 1 - m, m - rep.annulus_lo});
      }
    }
  c.msg << "35 contexts, smallest margin to the annulus = " << sci(min_margin);
  return {2, "Pisot certification", c.ok, c.msg.str()};
}

inline Result c3_greedy() {
  Check c;
  std::mt19937_64 rng(20240601);
  const std::vector<std::pair<int, int>> grid{{2, 1}, {3, 2}, {4, 3}, {5, 1}, {2, 4}};
  std::vector<ContextPtr> ctxs;
  for (auto [n, q] : grid) ctxs.push_back(make_context(n, q));
  int done = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto& ctx = ctxs[static_cast<std::size_t>(t) % ctxs.size()];
    const long den = 2 + static_cast<long>(rng() % 999);
    const long num = static_cast<long>(rng() % static_cast<unsigned long>(den));
    const AlgNum x(ctx, mpq_class(num, den));
    const auto d = greedy_digits(x, 50);
    // x = sum d_j beta^-j + beta^-50 T^50(x)
    const AlgNum rebuilt = digit_value(ctx, d.digits) + AlgNum::beta_pow(ctx, -50) * *d.tail_remainder;
    c.require(rebuilt == x, "identity for " + std::to_string(num) + "/" + std::to_string(den));
    c.require(validate_digits(*ctx, d.digits).ok(), "restrictions 1-2 for " + std::to_string(num) + "/" + std::to_string(den));
    c.require(d.tail_remainder->sign() >= 0 && (*d.tail_remainder - 1L).sign() < 0, "restriction 3 (T^k x < 1)");
    ++done;
  }
  auto golden = make_context(2, 1);
  const AlgNum half(golden, mpq_class(1, 2));
  const auto d = greedy_digits(half, 9);
  c.require(d.digits == std::vector<int>({0, 1, 0, 0, 1, 0, 0, 1, 0}), "period-3 digits");
  const auto o = orbit(half, 3);
  c.require(o[3] == half && !(o[1] == half) && !(o[2] == half), "T^3(1/2) = 1/2 with period 3");
  c.msg << done << " rationals x 50 digits exact; 1/2 -> (0,1,0) repeating";
  return {3, "greedy exactness", c.ok, c.msg.str()};
}

inline Result c4_classify() {
  Check c;
  auto ctx = make_context(2, 1);
  const auto r = classify_representation(ctx, {0}, {1, 0});
  c.require(r.kind == RepresentationCase::NonGreedyWithQuasiTail, std::string("kind ") + to_string(r.kind));
  c.require(r.k && *r.k == 1, "k = 1");
  c.require(r.greedy && *r.greedy == std::vector<int>{1}, "greedy form (1)");
  c.require(r.value == AlgNum::inv_beta(ctx), "value 1/beta");
  const auto u = classify_representation(ctx, {}, {1, 0});
  c.require(u.kind == RepresentationCase::UnitValue, "quasi-tail is UnitValue");
  c.msg << "(0;1,0...) -> " << to_string(r.kind) << " k=1 greedy (1); (;1,0...) -> " << to_string(u.kind);
  return {4, "classification", c.ok, c.msg.str()};
}

inline Result c5_basis() {
  Check c;
  std::size_t chains = 0, landing_fail = 0, landing_fail_q1 = 0, late_by_one = 0, other_fail = 0;
  for (int n = 2; n <= 4; ++n)
    for (int q = 1; q <= 3; ++q) {
      auto ctx = make_context(n, q);
      const std::string tag = "(" + std::to_string(n) + "," + std::to_string(q) + ")";
      c.require(transfer_apply(red_basis(ctx, 0)) == ExactPC::constant(ctx, AlgNum(ctx, 1L)), tag + " P F_0 = chi");
      for (int r = 1; r < n; ++r)
        c.require(transfer_apply(red_basis(ctx, r)) == red_basis(ctx, r - 1), tag + " P F_r = F_{r-1}");
      for (const auto& idx : enumerate_indices(*ctx, 3)) {
        ++chains;
        const auto rep = basis_action_check(ctx, idx);
        if (!rep.one_step_ok || (!rep.landed_nonnegative_unit && rep.lands_all_k)) ++other_fail;
        c.require(rep.one_step_ok, tag + " erase/decrement rule");
        const bool lands = rep.lands_in_span && rep.lands_all_k;
        if (!lands) {
          ++landing_fail;
          if (q == 1) ++landing_fail_q1;
          if (rep.first_landing == rep.all_k_exponent + 1) ++late_by_one;
        }
        c.require(lands, tag + " landing in span after m-1+sum k applications");
      }
    }
  c.msg << chains << " chains; erase/decrement failures " << other_fail << "; landing failures " << landing_fail
        << " (q=1: " << landing_fail_q1 << ", reaching the span one step after m-1+sum k: " << late_by_one << ")";
  return {5, "basis action", c.ok, c.msg.str()};
}

inline Result c6_density() {
  Check c;
  for (int n = 2; n <= 8; ++n)
    for (int q = 1; q <= 5; ++q) {
      const auto d = invariant_density(make_context(n, q));
      const std::string tag = "(" + std::to_string(n) + "," + std::to_string(q) + ")";
      c.require(d.fixed_point, tag + " P u1 = u1");
      c.require(d.unit_mass, tag + " integral 1");
      c.require(d.positive, tag + " positivity");
    }
  auto ctx = make_context(2, 1);
  const auto u = invariant_density(ctx).u1;
  // oracle: s = (1, beta^-2) normalized by 2 - 1/beta
  const AlgNum norm = AlgNum(ctx, 2L) - AlgNum::inv_beta(ctx);
  const double o0 = (AlgNum::beta(ctx) / norm).to_double();
  const double o1 = (AlgNum::beta_pow(ctx, 2) * AlgNum::beta_pow(ctx, -2) / norm).to_double();
  const double v0 = u.values()[0].to_double(), v1 = u.values()[1].to_double();
  c.require(std::fabs(v0 - o0) <= 1e-12 && std::fabs(v1 - o1) <= 1e-12, "oracle mismatch");
  c.require(std::fabs(v0 - 1.1708203932) <= 1e-10 && std::fabs(v1 - 0.7236067977) <= 1e-10, "golden values");
  std::ostringstream s;
  s.precision(12);
  s << "35 contexts exact; golden u1 = " << v0 << " / " << v1;
  c.msg << s.str();
  return {6, "invariant density", c.ok, c.msg.str()};
}

inline Result c7_spectral() {
  Check c;
  double worst_det = 0, worst_l2 = 0, worst_k2 = 0;
  for (int n = 2; n <= 8; ++n)
    for (int q = 1; q <= 5; ++q) {
      auto ctx = make_context(n, q);
      const auto sd = spectral_data(ctx);
      const std::string tag = "(" + std::to_string(n) + "," + std::to_string(q) + ")";
      worst_det = std::max(worst_det, sd.det_identity_residual);
      c.require(sd.det_identity_residual <= 1e-10, tag + " det residual " + sci(sd.det_identity_residual));
      c.require(sd.window_ok, tag + " lambda2 window");
      c.require(sd.column_sums_one, tag + " column sums");
      if (n == 2) {
        const double b = ctx->beta_float(), r = std::log(double(q)) / std::log(b);
        const double dl = std::fabs(sd.lambda2_mod - q / (b * b)), dk = std::fabs(sd.K2 - (2 - r) / (3 - r));
        worst_l2 = std::max(worst_l2, dl);
        worst_k2 = std::max(worst_k2, dk);
        c.require(dl <= 1e-12, tag + " |lambda2| = q beta^-2");
        c.require(dk <= 1e-12, tag + " K2 formula");
      }
    }
  c.msg << "max det residual " << sci(worst_det) << "; n=2: |lambda2| gap " << sci(worst_l2) << ", K2 gap "
        << sci(worst_k2);
  return {7, "spectral identities", c.ok, c.msg.str()};
}

inline Result c8_envelope() {
  Check c;
  auto ctx = make_context(2, 1);
  const auto f = approximate_lipschitz(ctx, [](const AlgNum& x) { return x; }, 20);
  const auto rep = iterate_transfer(f, 40, AlgNum(ctx, mpq_class(1, 2)));
  const double beta = ctx->beta_float();
  for (auto [N, e] : rep.errors) {
    c.require(e <= rep.K1_fitted * std::pow(beta, -2.0 * N / 3) * (1 + 1e-12), "envelope at N=" + std::to_string(N));
    if (N > 0) c.require(e <= rep.errors[static_cast<std::size_t>(N - 1)].second * (1 + 1e-12), "monotone at N=" + std::to_string(N));
  }
  const double plateau_cap = 10 * std::pow(beta, -20);
  c.require(rep.plateau_level <= plateau_cap, "plateau " + sci(rep.plateau_level));
  const double gate = 0.9 * std::log(std::pow(beta, -2));
  c.require(rep.fitted_rate <= gate, "pre-plateau slope " + std::to_string(rep.fitted_rate) + " > " + std::to_string(gate));
  c.msg << "K1 = " << sci(rep.K1_fitted) << ", plateau " << sci(rep.plateau_level) << " (cap " << sci(plateau_cap)
        << "), slope over N=" << rep.fit_begin << ".." << rep.fit_end - 1 << " is " << rep.fitted_rate << " (gate "
        << gate << ", ln(1/beta) = " << -std::log(beta) << "), mode " << rep.mode;
  return {8, "decay envelope", c.ok, c.msg.str()};
}

inline Result c9_psi0() {
  Check c;
  double worst = 0;
  for (auto [n, q] : {std::pair{2, 1}, {3, 1}, {2, 2}, {2, 3}}) {
    const double r = norm2(pexp_transfer(psi0(make_context(n, q))));
    worst = std::max(worst, r);
    c.require(r <= 1e-12, "(" + std::to_string(n) + "," + std::to_string(q) + ") ||P psi0|| = " + sci(r));
  }
  c.msg << "max ||P psi0||_2 = " << sci(worst);
  return {9, "psi0 annihilated", c.ok, c.msg.str()};
}

inline Result c10_psiz() {
  Check c;
  auto ctx = make_context(2, 1);
  double worst_gap = 0, worst_iso = 0;
  for (cplx z : {cplx(0.5), cplx(0.3, 0.4), cplx(-0.6)}) {
    const auto r = psi_z(ctx, z, 12);
    const double gap = std::fabs(r.residual_l2 - r.residual_bound);
    worst_gap = std::max(worst_gap, gap);
    worst_iso = std::max(worst_iso, r.isometry_defect);
    c.require(gap <= 1e-9, "residual mismatch " + sci(gap));
    c.require(r.isometry_defect <= 1e-10, "isometry defect " + sci(r.isometry_defect));
  }
  c.msg << "max |residual - |z|^13 ||u^1/2 W^12 h|| | = " << sci(worst_gap) << ", max isometry defect "
        << sci(worst_iso);
  return {10, "psi_z residual identity", c.ok, c.msg.str()};
}

inline ExactPC random_exact_pc(const ContextPtr& ctx, std::mt19937_64& rng) {
  // breakpoints mix rationals and layer points
  std::vector<AlgNum> pts;
  const int cells = 1 + static_cast<int>(rng() % 5);
  for (int i = 0; i < cells - 1; ++i) {
    if (rng() % 2) {
      const long den = 2 + static_cast<long>(rng() % 30);
      pts.emplace_back(ctx, mpq_class(1 + static_cast<long>(rng() % static_cast<unsigned long>(den - 1)), den));
    } else {
      pts.push_back(AlgNum::beta_pow(ctx, -(1 + static_cast<int>(rng() % 6))) * static_cast<long>(1 + rng() % ctx->q()));
    }
  }
  std::sort(pts.begin(), pts.end());
  std::vector<AlgNum> br{AlgNum(ctx, 0L)};
  for (auto& p : pts)
    if (p.sign() > 0 && (p - 1L).sign() < 0 && compare(p, br.back()) > 0) br.push_back(p);
  br.emplace_back(ctx, 1L);
  std::vector<AlgNum> v;
  for (std::size_t i = 0; i + 1 < br.size(); ++i)
    v.emplace_back(ctx, mpq_class(static_cast<long>(rng() % 41) - 20, 1 + static_cast<long>(rng() % 7)));
  return ExactPC(ctx, br, v);
}

inline Result c11_duality() {
  Check c;
  std::mt19937_64 rng(11);
  const std::vector<std::pair<int, int>> grid{{2, 1}, {3, 2}, {2, 3}, {4, 1}};
  int pairs = 0;
  double worst_iso = 0, worst_orth = 0;
  for (int t = 0; t < 100; ++t) {
    auto ctx = make_context(grid[static_cast<std::size_t>(t) % grid.size()].first, grid[static_cast<std::size_t>(t) % grid.size()].second);
    const auto f = random_exact_pc(ctx, rng), g = random_exact_pc(ctx, rng);
    c.require(duality_check(f, g).is_zero(), "exact duality");
    ++pairs;
    const auto u = invariant_density(ctx).u1;
    for (int p : {1, 2}) {
      const double d = std::fabs(weighted_isometry_check(u, f, p));
      worst_iso = std::max(worst_iso, d);
      c.require(d <= 1e-12, "weighted isometry p=" + std::to_string(p) + " residual " + sci(d));
    }
    const double o = std::abs(inner_product(psi0(ctx), pexp_koopman(PiecewiseExp::from_pc(g))));
    worst_orth = std::max(worst_orth, o);
    c.require(o <= 1e-10, "psi0 orthogonality " + sci(o));
  }
  c.msg << pairs << " exact pairs; max isometry residual " << sci(worst_iso) << "; max |<psi0, K g>| " << sci(worst_orth);
  return {11, "duality and isometry", c.ok, c.msg.str()};
}

inline Result c12_correlation() {
  Check c;
  auto ctx = make_context(2, 1);
  const auto g = ExactPC::indicator(ctx, AlgNum(ctx, 0L), AlgNum::inv_beta(ctx), AlgNum(ctx, 1L));
  const auto rep = correlation_exact(g, 40);
  const double beta = ctx->beta_float();
  const double target = std::pow(beta, -2);
  double worst_ratio = 0;
  for (const auto& l : rep.lags) {
    const double cov = std::fabs(l.covariance.to_double());
    c.require(cov <= rep.K1_fitted * std::pow(beta, -2.0 * l.lag / 3) * (1 + 1e-12), "envelope at lag " + std::to_string(l.lag));
    if (l.lag >= 10 && l.lag < 40) {
      const double ratio = std::fabs(rep.lags[static_cast<std::size_t>(l.lag + 1)].covariance.to_double()) / cov;
      worst_ratio = std::max(worst_ratio, std::fabs(ratio / target - 1));
    }
  }
  c.require(worst_ratio <= 0.05, "tail ratio off by " + sci(worst_ratio));
  c.msg << "K1 = " << sci(rep.K1_fitted) << "; max relative deviation of |cov(l+1)/cov(l)| from beta^-2 for l>=10: "
        << sci(worst_ratio);
  return {12, "correlation decay", c.ok, c.msg.str()};
}

inline Result c13_stochastic(unsigned threads = 1) {
  Check c;
  auto ctx = make_context(2, 1);
  const auto chi = ExactPC::constant(ctx, AlgNum(ctx, 1L));
  const auto r = remainder_pdf_check(chi, 0xC0FFEE, 1000000, 50);
  c.require(r.passed(), "histogram: " + std::to_string(r.fraction_within) + " of bins within 4 sigma");
  const auto u1 = invariant_density(ctx).u1;
  const double M = first_moment(u1).to_double();
  double lo = INFINITY, hi = 0;
  std::ostringstream vals;
  for (int N : {100, 1000, 10000}) {
    const auto e = ergodic_average(ctx, [](double x) { return x; }, M, 0xC0FFEE, 1000, N, threads);
    lo = std::min(lo, e.var_times_N());
    hi = std::max(hi, e.var_times_N());
    vals << " " << e.var_times_N();
  }
  c.require(hi / lo <= 3.0, "Var*N spread " + std::to_string(hi / lo));
  c.msg << "bins within 4 sigma: " << r.fraction_within << "; Var(A_N)*N for N=1e2,1e3,1e4:" << vals.str();
  return {13, "stochastic corroboration", c.ok, c.msg.str()};
}

}  // namespace detail

inline constexpr int kCriteria = 13;

inline double budget(int id) {
  static const double b[] = {0, 1, 5, 10, 1, 30, 5, 5, 120, 1, 60, 30, 30, 120};
  return (id >= 1 && id <= kCriteria) ? b[id] : 0;
}

/// Runs criterion `id` (1..13); exceptions are reported as failures.
inline Result run(int id, unsigned threads = 1) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  Result r;
  try {
    switch (id) {
      case 1: r = detail::c1_beta(); break;
      case 2: r = detail::c2_pisot(); break;
      case 3: r = detail::c3_greedy(); break;
      case 4: r = detail::c4_classify(); break;
      case 5: r = detail::c5_basis(); break;
      case 6: r = detail::c6_density(); break;
      case 7: r = detail::c7_spectral(); break;
      case 8: r = detail::c8_envelope(); break;
      case 9: r = detail::c9_psi0(); break;
      case 10: r = detail::c10_psiz(); break;
      case 11: r = detail::c11_duality(); break;
      case 12: r = detail::c12_correlation(); break;
      case 13: r = detail::c13_stochastic(threads); break;
      default: throw domain_error("unknown criterion " + std::to_string(id));
    }
  } catch (const std::exception& e) {
    r.id = id;
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(clock::now() - t0).count();
  r.budget_seconds = budget(id);
  return r;
}

inline std::string format_line(const Result& r) {
  std::ostringstream s;
  s.precision(2);
  s << std::fixed << (r.passed ? "PASS" : "FAIL") << "  criterion " << r.id << " (" << r.name << ") [" << r.seconds
    << " s, budget " << r.budget_seconds << " s]: " << r.detail;
  return s.str();
}

}  // namespace betaexp::selftest
