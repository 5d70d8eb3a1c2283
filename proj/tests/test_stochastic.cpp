#include <gtest/gtest.h>

#include <cmath>

#include "betaexp/stochastic.hpp"

using namespace betaexp;

TEST(Stochastic, RngReproducible) {
  CounterRng a(42), b(42), c(43);
  for (std::uint64_t i = 0; i < 100; ++i) {
    EXPECT_EQ(a.bits(i), b.bits(i));
    EXPECT_NE(a.bits(i), c.bits(i));
    const double u = a.uniform(i);
    EXPECT_TRUE(u >= 0 && u < 1);
  }
  auto ctx = make_context(2, 1);
  auto one = FloatPC::constant(ctx, 1.0);
  EXPECT_EQ(sample_density(one, 5, 1000).draws, sample_density(one, 5, 1000).draws);
  EXPECT_TRUE(sample_density(one, 5, 0).draws.empty());
}

TEST(Stochastic, UniformKS) {
  auto ctx = make_context(2, 1);
  auto b = sample_density(FloatPC::constant(ctx, 1.0), 0xC0FFEE, 100000);
  EXPECT_LE(ks_statistic(b.draws, [](double x) { return x; }), ks_threshold(b.count));
}

TEST(Stochastic, GoldenDensityMass) {
  auto ctx = make_context(2, 1);
  auto u1 = invariant_density(ctx).u1;
  const std::size_t n = 200000;
  auto b = sample_density(u1, 0xC0FFEE, n);
  const double p = (u1.values()[0] * AlgNum::inv_beta(ctx)).to_double();
  EXPECT_NEAR(p, 0.7236067977, 1e-10);
  std::size_t hit = 0;
  for (double x : b.draws) hit += x < 1 / ctx->beta_float();
  EXPECT_NEAR(double(hit) / n, p, 3 * std::sqrt(p * (1 - p) / n));
  DensitySampler s(to_float(u1));
  EXPECT_LE(ks_statistic(b.draws, [&](double x) { return s.cdf(x); }), ks_threshold(n));
}

TEST(Stochastic, RejectsBadDensity) {
  auto ctx = make_context(2, 1);
  EXPECT_THROW(sample_density(FloatPC::constant(ctx, 2.0), 1, 10), domain_error);
  EXPECT_THROW(sample_density(FloatPC(ctx, {0.0, 0.5, 1.0}, {3.0, -1.0}), 1, 10), domain_error);
}

TEST(Stochastic, RemainderPdf) {
  auto ctx = make_context(2, 1);
  auto chi = ExactPC::constant(ctx, AlgNum(ctx, 1L));
  auto r = remainder_pdf_check(chi, 0xC0FFEE, 200000, 50);
  EXPECT_TRUE(r.passed());
  auto u1 = invariant_density(ctx).u1;
  EXPECT_TRUE(remainder_pdf_check(u1, 7, 200000, 40).passed());
  // density supported on [0, 1/beta): the remainder covers all of [0,1)
  auto f = ExactPC::indicator(ctx, AlgNum(ctx, 0L), AlgNum::inv_beta(ctx), AlgNum::beta(ctx));
  auto rf = remainder_pdf_check(f, 9, 100000, 20);
  EXPECT_TRUE(rf.passed());
  EXPECT_LT(rf.support_lo, 1e-3);
  EXPECT_GT(rf.support_hi, 1 - 1e-3);
  // bins where P g vanishes stay empty
  auto g = ExactPC::indicator(ctx, AlgNum(ctx, 0L), AlgNum(ctx, mpq_class(1, 2)), AlgNum(ctx, 2L));
  auto rg = remainder_pdf_check(g, 9, 100000, 20);
  EXPECT_TRUE(rg.passed());
  EXPECT_EQ(rg.observed.back(), 0u);
  EXPECT_LT(rg.support_hi, ctx->beta_float() / 2);
}

TEST(Stochastic, CorrelationGolden) {
  auto ctx = make_context(2, 1);
  auto g = ExactPC::indicator(ctx, AlgNum(ctx, 0L), AlgNum::inv_beta(ctx), AlgNum(ctx, 1L));
  auto c = correlation_exact(g, 40);
  EXPECT_TRUE(c.within_bound());
  EXPECT_GT(c.lags[0].covariance.sign(), 0);
  for (int l = 10; l < 40; ++l)
    EXPECT_NEAR(std::fabs(c.lags[l + 1].covariance.to_double() / c.lags[l].covariance.to_double()), c.lambda2_mod,
                1e-9);
  // E(X_k X_m) - M^2 depends on |k - m| only, via an independent Koopman path
  const AlgNum M2 = c.mean * c.mean;
  for (auto [k, m] : {std::pair{0, 3}, {3, 0}, {2, 5}, {4, 4}, {1, 2}})
    EXPECT_TRUE(joint_moment(g, k, m) - M2 == c.lags[std::abs(k - m)].covariance);
  auto one = correlation_exact(ExactPC::constant(ctx, AlgNum(ctx, 1L)), 5);
  for (const auto& l : one.lags) EXPECT_TRUE(l.covariance.is_zero());
}

TEST(Stochastic, CorrelationGrid) {
  for (auto [n, q] : {std::pair{3, 1}, {2, 3}, {4, 2}}) {
    auto ctx = make_context(n, q);
    auto g = ExactPC::indicator(ctx, AlgNum(ctx, mpq_class(1, 3)), AlgNum(ctx, mpq_class(3, 4)), AlgNum(ctx, 1L));
    auto c = correlation_exact(g, 40);
    EXPECT_TRUE(c.within_bound()) << n << "," << q;
    EXPECT_TRUE(std::isfinite(c.K1_fitted));
  }
}

TEST(Stochastic, Stationarity) {
  auto ctx = make_context(3, 2);
  auto g = ExactPC::indicator(ctx, AlgNum(ctx, mpq_class(1, 5)), AlgNum(ctx, mpq_class(2, 3)), AlgNum(ctx, 3L));
  const AlgNum m0 = stationary_mean(g, 0);
  for (int k = 1; k <= 6; ++k) EXPECT_TRUE(stationary_mean(g, k) == m0);
}

TEST(Stochastic, Ergodic) {
  auto ctx = make_context(2, 1);
  auto u1 = invariant_density(ctx).u1;
  const double M = first_moment(u1).to_double();
  // closed form: integral of x u1 = (v0 / beta^2 + v1 (1 - 1/beta^2)) / 2
  const double b = ctx->beta_float();
  EXPECT_NEAR(M, (u1.values()[0].to_double() / (b * b) + u1.values()[1].to_double() * (1 - 1 / (b * b))) / 2, 1e-15);
  auto c = ergodic_average(ctx, [](double) { return 0.75; }, 0.75, 1, 50, 100);
  EXPECT_EQ(c.variance, 0.0);
  double lo = INFINITY, hi = 0;
  for (int N : {100, 1000}) {
    auto r = ergodic_average(ctx, [](double x) { return x; }, M, 0xC0FFEE, 500, N);
    EXPECT_LT(std::fabs(r.bias), 4 * std::sqrt(r.variance / 500));
    lo = std::min(lo, r.var_times_N());
    hi = std::max(hi, r.var_times_N());
  }
  EXPECT_LE(hi / lo, 3.0);
}

TEST(Stochastic, ExceptionalOrbit) {
  auto ctx = make_context(2, 1);
  auto cyc = exact_cycle(AlgNum(ctx, mpq_class(1, 2)));
  ASSERT_EQ(cyc.points.size(), 3u);
  EXPECT_EQ(cyc.preperiod, 0u);
  const double b = ctx->beta_float();
  EXPECT_NEAR(cyc.points[1].to_double(), b / 2, 1e-15);
  EXPECT_NEAR(cyc.points[2].to_double(), (std::sqrt(5.0) - 1) / 4, 1e-15);
  double avg = 0;
  for (const auto& p : cyc.points) avg += p.to_double() / 3;
  const double M = first_moment(invariant_density(ctx).u1).to_double();
  EXPECT_GT(std::fabs(avg - M), 0.05);
  auto r = ergodic_average(ctx, [](double x) { return x; }, avg, 0, 0, 1);
  (void)r;
}

TEST(Stochastic, Shadowing) {
  auto ctx = make_context(2, 1);
  const int pred = predicted_shadowing_horizon(*ctx, 1e-9);
  for (int den : {7, 11, 13}) {
    const int h = shadowing_horizon(AlgNum(ctx, mpq_class(3, den)), 1e-9, 1000);
    EXPECT_GE(h, pred - 5);
    EXPECT_LT(h, 1000);
  }
}
