#include <gtest/gtest.h>

#include <random>

#include "betaexp/pcfun.hpp"

using namespace betaexp;

namespace {

ExactPC random_exact(const ContextPtr& ctx, std::mt19937_64& rng, int cells, bool nonneg = false) {
  std::uniform_int_distribution<int> num(1, 997), val(nonneg ? 0 : -9, 9);
  std::vector<mpq_class> cuts;
  for (int i = 0; i < cells - 1; ++i) cuts.emplace_back(num(rng), 998);
  for (auto& c : cuts) c.canonicalize();
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<AlgNum> br{AlgNum(ctx, 0L)};
  for (const auto& c : cuts) br.emplace_back(ctx, c);
  br.emplace_back(ctx, 1L);
  std::vector<AlgNum> vals;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) vals.emplace_back(ctx, mpq_class(val(rng), 4));
  return ExactPC(ctx, br, vals);
}

// mixes beta-dependent breakpoints into the partition
ExactPC random_layered(const ContextPtr& ctx, std::mt19937_64& rng) {
  auto f = random_exact(ctx, rng, 5);
  auto b = AlgNum::inv_beta(ctx) * mpq_class(std::uniform_int_distribution<int>(1, 3)(rng), 4);
  auto g = ExactPC::indicator(ctx, AlgNum(ctx, 0L), b, AlgNum(ctx, mpq_class(3, 2)));
  return f + g;
}

}  // namespace

TEST(PCFun, TransferOfConstantGolden) {
  auto ctx = make_context(2, 1);
  auto chi = ExactPC::constant(ctx, AlgNum(ctx, 1L));
  auto pc = transfer_apply(chi);
  ASSERT_EQ(pc.cells(), 2u);
  EXPECT_TRUE(pc.breakpoints()[1] == AlgNum::beta(ctx) - 1L);
  EXPECT_TRUE(pc.values()[0] == AlgNum::inv_beta(ctx) * 2L);
  EXPECT_TRUE(pc.values()[1] == AlgNum::inv_beta(ctx));
  EXPECT_TRUE(integrate(pc) == AlgNum(ctx, 1L));
}

TEST(PCFun, KoopmanFixtures) {
  auto ctx = make_context(2, 1);
  auto chi = ExactPC::constant(ctx, AlgNum(ctx, 1L));
  EXPECT_TRUE(koopman_apply(chi) == chi);
  auto half = AlgNum(ctx, mpq_class(1, 2));
  auto g = ExactPC::indicator(ctx, AlgNum(ctx, 0L), half, AlgNum(ctx, 1L));
  auto kg = koopman_apply(g);
  ASSERT_EQ(kg.cells(), 4u);
  auto ib = AlgNum::inv_beta(ctx);
  EXPECT_TRUE(kg.breakpoints()[1] == ib * mpq_class(1, 2));
  EXPECT_TRUE(kg.breakpoints()[2] == ib);
  EXPECT_TRUE(kg.breakpoints()[3] == ib + ib * mpq_class(1, 2));
  EXPECT_TRUE(kg.values()[0] == AlgNum(ctx, 1L));
  EXPECT_TRUE(kg.values()[1].is_zero());
  EXPECT_TRUE(kg.values()[2] == AlgNum(ctx, 1L));
  EXPECT_TRUE(kg.values()[3].is_zero());
}

TEST(PCFun, NormsAndIntegrals) {
  auto ctx = make_context(3, 2);
  auto chi = ExactPC::constant(ctx, AlgNum(ctx, 1L));
  EXPECT_TRUE(integrate(chi) == AlgNum(ctx, 1L));
  EXPECT_TRUE(inner_product(chi, chi) == AlgNum(ctx, 1L));
  EXPECT_DOUBLE_EQ(norm(chi, 1), 1.0);
  EXPECT_DOUBLE_EQ(norm(chi, 2), 1.0);
  EXPECT_DOUBLE_EQ(norm(chi, 0), 1.0);
  auto cf = ComplexPC::constant(ctx, cplx(0, 2));
  EXPECT_NEAR(inner_product(cf, cf).real(), 4.0, 1e-15);
  EXPECT_NEAR(std::abs(inner_product(cf, ComplexPC::constant(ctx, cplx(1, 0))) - cplx(0, -2)), 0, 1e-15);
}

TEST(PCFun, CanonicalForm) {
  auto ctx = make_context(2, 1);
  std::vector<AlgNum> br{AlgNum(ctx, 0L), AlgNum(ctx, mpq_class(1, 3)), AlgNum(ctx, mpq_class(1, 2)), AlgNum(ctx, 1L)};
  std::vector<AlgNum> v{AlgNum(ctx, 2L), AlgNum(ctx, 2L), AlgNum(ctx, 1L)};
  ExactPC f(ctx, br, v);
  EXPECT_EQ(f.cells(), 2u);
  EXPECT_THROW(ExactPC(ctx, {AlgNum(ctx, 0L), AlgNum(ctx, mpq_class(1, 2))}, {AlgNum(ctx, 1L)}), domain_error);
  EXPECT_THROW(ExactPC(ctx, {AlgNum(ctx, 0L), AlgNum(ctx, mpq_class(1, 2)), AlgNum(ctx, mpq_class(1, 2)), AlgNum(ctx, 1L)},
                       {AlgNum(ctx, 1L), AlgNum(ctx, 2L), AlgNum(ctx, 3L)}),
               domain_error);
}

TEST(PCFun, ConservationPositivityContraction) {
  std::mt19937_64 rng(3);
  for (auto [n, q] : {std::pair{2, 1}, {3, 2}, {4, 3}}) {
    auto ctx = make_context(n, q);
    for (int t = 0; t < 20; ++t) {
      auto f = random_layered(ctx, rng);
      auto pf = transfer_apply(f);
      EXPECT_TRUE(integrate(pf) == integrate(f));
      EXPECT_LE(compare(norm1_exact(pf), norm1_exact(f)), 0);
      auto g = random_exact(ctx, rng, 6, true);
      auto pg = transfer_apply(g);
      for (const auto& v : pg.values()) EXPECT_GE(v.sign(), 0);
      EXPECT_TRUE(norm1_exact(pg) == norm1_exact(g));
    }
  }
}

TEST(PCFun, DualityExact) {
  std::mt19937_64 rng(17);
  for (auto [n, q] : {std::pair{2, 1}, {3, 1}, {2, 3}}) {
    auto ctx = make_context(n, q);
    for (int t = 0; t < 25; ++t) {
      auto f = random_layered(ctx, rng), g = random_layered(ctx, rng);
      EXPECT_TRUE(duality_check(f, g).is_zero());
    }
  }
}

TEST(PCFun, KoopmanMultiplicative) {
  std::mt19937_64 rng(23);
  auto ctx = make_context(3, 2);
  for (int t = 0; t < 10; ++t) {
    auto a = random_layered(ctx, rng), b = random_layered(ctx, rng);
    EXPECT_TRUE(koopman_apply(multiply(a, b)) == multiply(koopman_apply(a), koopman_apply(b)));
  }
}

TEST(PCFun, FloatMatchesExact) {
  std::mt19937_64 rng(29);
  auto ctx = make_context(3, 2);
  for (int t = 0; t < 10; ++t) {
    auto f = random_layered(ctx, rng);
    auto pe = to_float(transfer_apply(f));
    auto pf = transfer_apply(to_float(f));
    EXPECT_NEAR(norm(pe - pf, 1), 0.0, 1e-12);
    auto ke = to_float(koopman_apply(f));
    auto kf = koopman_apply(to_float(f));
    EXPECT_NEAR(norm(ke - kf, 1), 0.0, 1e-12);
  }
}

TEST(PCFun, GridQuadratureOracle) {
  std::mt19937_64 rng(31);
  auto ctx = make_context(2, 1);
  const double beta = ctx->beta_float();
  auto f = to_float(random_layered(ctx, rng));
  auto pf = transfer_apply(f);
  const int N = 1000000;
  const double h = 1.0 / N;
  double diff = 0, fmax = norm(f, 0);
  for (int k = 0; k < N; ++k) {
    const double x = (k + 0.5) * h;
    double direct = 0;
    for (int j = 0; j <= ctx->q(); ++j) {
      const double y = (x + j) / beta;
      if (y < 1) direct += f.eval(y);
    }
    direct /= beta;
    diff += std::fabs(direct - pf.eval(x)) * h;
  }
  EXPECT_LE(diff, 2e-6 * fmax);
}

TEST(PCFun, HighPrecisionValues) {
  std::mt19937_64 rng(37);
  auto ctx = make_context(2, 1);
  auto f = random_layered(ctx, rng);
  auto ph = transfer_apply(to_high_precision(f));
  auto pe = transfer_apply(f);
  ASSERT_EQ(ph.cells(), pe.cells());
  for (std::size_t i = 0; i < ph.cells(); ++i)
    EXPECT_LT(abs(ph.values()[i] - convert<hp_float>(pe.values()[i])), hp_float("1e-70"));
}
