#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "betaexp/algnum.hpp"

using namespace betaexp;

namespace {

double quadratic_beta(int q) { return (q + std::sqrt(double(q) * q + 4.0 * q)) / 2; }

}  // namespace

TEST(Context, GoldenFixture) {
  auto ctx = make_context(2, 1, 1e-15);
  EXPECT_NEAR(ctx->beta_float(), 1.6180339887498949, 1e-15);
  EXPECT_LT(ctx->beta_lo(), ctx->beta_hi());
  EXPECT_LE(ctx->beta_hi() - ctx->beta_lo(), mpq_class(1e-15));
  EXPECT_LT(ctx->eval_p(ctx->beta_lo()), 0);
  EXPECT_GT(ctx->eval_p(ctx->beta_hi()), 0);
  EXPECT_EQ(ctx->beta_decimal(30), "1.618033988749894848204586834366");
}

TEST(Context, QuadraticAndCubicFixtures) {
  EXPECT_NEAR(make_context(2, 2, 1e-15)->beta_float(), 2.7320508075688772, 1e-15);
  EXPECT_NEAR(make_context(3, 1, 1e-12)->beta_float(), 1.8392867552141612, 1e-15);
}

TEST(Context, RejectsBadArguments) {
  EXPECT_THROW(make_context(1, 1), domain_error);
  EXPECT_THROW(make_context(2, 0), domain_error);
  EXPECT_THROW(make_context(2, 1, 0.0), domain_error);
  EXPECT_THROW(make_context(2, 1, mpq_class(-1)), domain_error);
}

TEST(Context, GridInvariants) {
  for (int n = 2; n <= 8; ++n) {
    double prev = 0;
    for (int q = 1; q <= 5; ++q) {
      auto ctx = make_context(n, q, 1e-20);
      EXPECT_GT(ctx->beta_lo(), q);
      EXPECT_LT(ctx->beta_hi(), q + 1);
      // the root of P on (q, q+1) is the only positive one: P < 0 on (0, beta)
      for (int k = 1; k <= 20; ++k) {
        mpq_class x(k * q, 20);
        EXPECT_LT(ctx->eval_p(x), 0);
      }
      if (n == 2) {
        EXPECT_NEAR(ctx->beta_float(), quadratic_beta(q), 1e-13);
      }
      EXPECT_GT(ctx->beta_float(), prev);
      prev = ctx->beta_float();
      // monotone in n with the lower bound q+1 - q beta_{2,q}^{-n}
      if (n > 2) {
        auto lower = make_context(n - 1, q, 1e-20);
        EXPECT_GE(ctx->beta_float(), lower->beta_float());
        const double b2 = quadratic_beta(q);
        EXPECT_GE(ctx->beta_float(), q + 1 - q * std::pow(b2, -n) - 1e-12);
      }
    }
  }
}

TEST(Context, EnclosureShrinksWithTolerance) {
  for (int n : {2, 5, 8}) {
    for (int q : {1, 3}) {
      auto a = make_context(n, q, mpq_class(1, 1000000));
      auto b = make_context(n, q, mpq_class(1, 10000000));
      EXPECT_GE((a->beta_hi() - a->beta_lo()) / (b->beta_hi() - b->beta_lo()), 10);
    }
  }
}

TEST(Context, InverseClosedForm) {
  for (int n = 2; n <= 6; ++n)
    for (int q = 1; q <= 4; ++q) {
      auto ctx = make_context(n, q);
      auto one = AlgNum::beta(ctx) * AlgNum::inv_beta(ctx);
      EXPECT_EQ(one.coeffs(), AlgNum(ctx, 1L).coeffs());
      EXPECT_TRUE(ctx->irreducible());
    }
}

TEST(AlgNum, GoldenReductions) {
  auto ctx = make_context(2, 1);
  auto b = AlgNum::beta(ctx);
  auto b2 = b * b;
  EXPECT_EQ(b2.coeffs()[0], 1);
  EXPECT_EQ(b2.coeffs()[1], 1);
  auto inv = AlgNum::inv_beta(ctx);
  EXPECT_TRUE(inv == b - 1L);
  EXPECT_NEAR(inv.to_double(), 0.6180339887498949, 1e-16);
}

TEST(AlgNum, DivisionAndZeroDivision) {
  auto ctx = make_context(4, 2);
  std::vector<mpq_class> c{mpq_class(3, 7), mpq_class(-2), mpq_class(1, 5), mpq_class(9)};
  AlgNum a(ctx, c);
  auto inv = AlgNum(ctx, 1L) / a;
  EXPECT_TRUE(inv * a == AlgNum(ctx, 1L));
  EXPECT_THROW(a / AlgNum(ctx, 0L), zero_division_error);
}

TEST(AlgNum, SignAndFloor) {
  auto ctx = make_context(3, 2);
  auto b = AlgNum::beta(ctx);
  EXPECT_EQ(b.floor(), 2);
  EXPECT_EQ((b - 3L).sign(), -1);
  EXPECT_EQ((b - 2L).sign(), 1);
  EXPECT_EQ((b - b).sign(), 0);
  // tiny but nonzero: beta^{-60} needs the fixed-point path
  auto tiny = AlgNum::beta_pow(ctx, -60);
  EXPECT_EQ(tiny.sign(), 1);
  EXPECT_EQ((-tiny).sign(), -1);
  // a difference cancelling to ~1e-40 relative to O(1) terms
  auto near = AlgNum::beta_pow(ctx, 3) - AlgNum::beta_pow(ctx, 3) + tiny;
  EXPECT_EQ(near.sign(), 1);
  EXPECT_EQ((AlgNum(ctx, 1L) + tiny).floor(), 1);
  EXPECT_EQ((AlgNum(ctx, 1L) - tiny).floor(), 0);
}

TEST(AlgNum, GcdZeroTest) {
  auto ctx = make_context(3, 1);
  const auto& p = ctx->p_poly();
  // P(x)(x + 1) vanishes at beta, x + 1 does not
  auto px1 = qpoly::mul(p, qpoly::poly{1, 1});
  EXPECT_TRUE(AlgNum::vanishes_at_beta(*ctx, px1));
  EXPECT_FALSE(AlgNum::vanishes_at_beta(*ctx, qpoly::poly{1, 1}));
  EXPECT_TRUE(AlgNum::vanishes_at_beta(*ctx, p));
  EXPECT_FALSE(AlgNum::vanishes_at_beta(*ctx, qpoly::poly{-2, 0, 1}));
}

TEST(AlgNum, RingLaws) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> num(-50, 50), den(1, 30);
  for (int n : {2, 3, 5}) {
    auto ctx = make_context(n, 2);
    auto rnd = [&] {
      std::vector<mpq_class> c(n);
      for (auto& x : c) {
        x = mpq_class(num(rng), den(rng));
        x.canonicalize();
      }
      return AlgNum(ctx, c);
    };
    for (int i = 0; i < 50; ++i) {
      auto a = rnd(), b = rnd(), c = rnd();
      EXPECT_EQ(((a * b) * c).coeffs(), (a * (b * c)).coeffs());
      EXPECT_EQ((a * (b + c)).coeffs(), (a * b + a * c).coeffs());
      EXPECT_EQ((a * b).coeffs(), (b * a).coeffs());
      // the float embedding lies inside the coefficient-wise interval
      const double v = a.to_double();
      mpq_class lo = 0, hi = 0, plo = 1, phi = 1;
      for (int k = 0; k < n; ++k) {
        const auto& ck = a.coeffs()[k];
        if (ck >= 0) {
          lo += ck * plo;
          hi += ck * phi;
        } else {
          lo += ck * phi;
          hi += ck * plo;
        }
        plo *= ctx->beta_lo();
        phi *= ctx->beta_hi();
      }
      EXPECT_GE(v, lo.get_d() - 1e-12);
      EXPECT_LE(v, hi.get_d() + 1e-12);
    }
  }
}

TEST(Pisot, GoldenRoots) {
  auto ctx = make_context(2, 1);
  auto rep = all_roots(*ctx);
  ASSERT_EQ(rep.other_roots.size(), 1u);
  EXPECT_NEAR(std::abs(rep.other_roots[0].value), 0.6180339887, 1e-10);
  EXPECT_NEAR(static_cast<double>((rep.beta_root.value + rep.other_roots[0].value).real()), 1.0, 1e-15);
  EXPECT_TRUE(rep.passed());
}

TEST(Pisot, GridAnnulus) {
  for (int n = 2; n <= 8; ++n)
    for (int q = 1; q <= 5; ++q) {
      auto ctx = make_context(n, q);
      auto rep = all_roots(*ctx);
      EXPECT_TRUE(rep.passed()) << n << "," << q;
      EXPECT_EQ(rep.other_roots.size(), static_cast<std::size_t>(n - 1));
      EXPECT_NEAR(static_cast<double>(rep.modulus_product), q, 1e-12 * q);
      for (const auto& r : rep.other_roots) {
        // residual check against the monic polynomial in long double
        std::complex<long double> p = 1;
        for (int i = 0; i < n; ++i) p = p * r.value - static_cast<long double>(q);
        EXPECT_LT(std::abs(p), 1e-12L);
        EXPECT_LT(std::abs(r.value), 1.0L);
        EXPECT_GT(std::abs(r.value), rep.annulus_lo);
      }
    }
}
