#include <gtest/gtest.h>

#include <cmath>

#include "betaexp/layers.hpp"

using namespace betaexp;

TEST(Layers, PointFixtures) {
  auto ctx = make_context(2, 1);
  EXPECT_TRUE(layer_point(ctx, {{0}, {0}}).is_zero());
  EXPECT_TRUE(layer_point(ctx, {{0}, {1}}) == AlgNum::inv_beta(ctx));
  EXPECT_TRUE(layer_point(ctx, {{1}, {1}}) == AlgNum(ctx, 1L));
  EXPECT_TRUE(layer_point(ctx, {{0, 1}, {0, 0}}) == AlgNum::beta_pow(ctx, -2));
  EXPECT_THROW(layer_point(ctx, {{2}, {0}}), domain_error);
  EXPECT_THROW(layer_point(ctx, {{0}, {2}}), domain_error);
  EXPECT_THROW(layer_point(ctx, {{0, 1}, {0}}), domain_error);
}

TEST(Layers, ConsecutivePointsDifferByWidth) {
  for (auto [n, q] : {std::pair{2, 1}, {3, 2}, {4, 3}}) {
    auto ctx = make_context(n, q);
    for (const auto& idx : enumerate_indices(*ctx, 2)) {
      LayerIndex nxt = idx;
      ++nxt.j.back();
      EXPECT_TRUE(layer_point(ctx, nxt) - layer_point(ctx, idx) == AlgNum::beta_pow(ctx, -idx.weight()));
    }
  }
}

TEST(Layers, RedBasis) {
  auto ctx = make_context(2, 1);
  auto F0 = red_basis(ctx, 0), F1 = red_basis(ctx, 1);
  EXPECT_TRUE(F0 == ExactPC::indicator(ctx, AlgNum(ctx, 0L), AlgNum::inv_beta(ctx), AlgNum::beta(ctx)));
  EXPECT_TRUE(F1 == ExactPC::indicator(ctx, AlgNum::inv_beta(ctx), AlgNum(ctx, 1L), AlgNum::beta_pow(ctx, 2)));
  for (auto [n, q] : {std::pair{3, 2}, {4, 1}}) {
    auto c = make_context(n, q);
    for (int r = 0; r < n; ++r) EXPECT_TRUE(integrate(red_basis(c, r)) == AlgNum(c, 1L));
    for (const auto& idx : enumerate_indices(*c, 2)) EXPECT_TRUE(integrate(basis_fn(c, idx)) == AlgNum(c, 1L));
    EXPECT_TRUE(transfer_apply(red_basis(c, 0)) == ExactPC::constant(c, AlgNum(c, 1L)));
    for (int r = 1; r < n; ++r) EXPECT_TRUE(transfer_apply(red_basis(c, r)) == red_basis(c, r - 1));
  }
}

TEST(Layers, BasisActionGolden) {
  auto ctx = make_context(2, 1);
  for (const auto& idx : enumerate_indices(*ctx, 3)) {
    auto rep = basis_action_check(ctx, idx);
    EXPECT_TRUE(rep.ok());
  }
  auto rep = basis_action_check(ctx, {{1, 1}, {0, 0}});
  EXPECT_EQ(rep.all_k_exponent, 3);
  EXPECT_TRUE(rep.lands_all_k);
}

TEST(Layers, BasisActionOneStepGeneralQ) {
  auto ctx = make_context(3, 2);
  for (const auto& idx : enumerate_indices(*ctx, 2)) {
    auto rep = basis_action_check(ctx, idx);
    EXPECT_TRUE(rep.one_step_ok);
    // for q > 1 the iterate first reaches a single sub-interval of a red
    // interval, and needs k_m + 1 more steps to reach chi
    EXPECT_EQ(rep.first_landing, rep.all_k_exponent + 1);
  }
}

TEST(Layers, TransferMatrixMatchesOperator) {
  for (auto [n, q] : {std::pair{2, 1}, {3, 2}, {5, 3}}) {
    auto ctx = make_context(n, q);
    auto T = transfer_matrix(ctx);
    for (int c = 0; c < n; ++c) {
      auto coords = red_coordinates(transfer_apply(red_basis(ctx, c)));
      ASSERT_TRUE(coords.has_value());
      for (int r = 0; r < n; ++r) EXPECT_TRUE((*coords)[r] == T.entries[r][c]);
    }
  }
}

TEST(Layers, SpectralGolden) {
  auto ctx = make_context(2, 1);
  auto sd = spectral_data(ctx);
  const double b = ctx->beta_float();
  EXPECT_NEAR(static_cast<double>(sd.eigenvalues[0].real()), 1.0, 1e-15);
  EXPECT_NEAR(static_cast<double>(sd.eigenvalues[1].real()), -1 / (b * b), 1e-15);
  EXPECT_NEAR(sd.lambda2_mod, 0.3819660113, 1e-10);
  EXPECT_NEAR(sd.window_lo, sd.lambda2_mod, 1e-14);
  EXPECT_NEAR(sd.K2, 2.0 / 3.0, 1e-14);
  EXPECT_TRUE(sd.window_ok);
  EXPECT_TRUE(sd.column_sums_one);
  EXPECT_LE(sd.det_identity_residual, 1e-10);
}

TEST(Layers, SpectralGrid) {
  for (int n = 2; n <= 8; ++n)
    for (int q = 1; q <= 5; ++q) {
      auto ctx = make_context(n, q);
      auto sd = spectral_data(ctx);
      EXPECT_TRUE(sd.window_ok) << n << "," << q;
      EXPECT_TRUE(sd.column_sums_one);
      EXPECT_LE(sd.det_identity_residual, 1e-10) << n << "," << q;
      if (n == 2) {
        const double b = ctx->beta_float(), r = std::log(q) / std::log(b);
        EXPECT_NEAR(sd.lambda2_mod, q / (b * b), 1e-12);
        EXPECT_NEAR(sd.K2, (2 - r) / (3 - r), 1e-12);
      }
    }
}

TEST(Layers, InvariantDensity) {
  auto ctx = make_context(2, 1);
  auto d = invariant_density(ctx);
  ASSERT_EQ(d.u1.cells(), 2u);
  EXPECT_NEAR(d.u1.values()[0].to_double(), 1.1708203932499369, 1e-12);
  EXPECT_NEAR(d.u1.values()[1].to_double(), 0.7236067977499790, 1e-12);
  // independent oracle: s = (1, beta^-2), normalized by 2 - 1/beta
  const double b = ctx->beta_float();
  EXPECT_NEAR(d.u1.values()[0].to_double(), b / (2 - 1 / b), 1e-14);
  EXPECT_TRUE(d.s[1] == AlgNum::beta_pow(ctx, -2));
  for (int n = 2; n <= 5; ++n)
    for (int q = 1; q <= 4; ++q) {
      auto dd = invariant_density(make_context(n, q));
      EXPECT_TRUE(dd.fixed_point && dd.unit_mass && dd.positive && dd.adjoint_fixed);
      EXPECT_TRUE(dd.s.back() == AlgNum::beta_pow(dd.u1.context(), -n) * static_cast<long>(q));
    }
}

TEST(Layers, PartitionGolden) {
  auto ctx = make_context(2, 1);
  auto leaves = partition_leaves(ctx, 3);
  ASSERT_EQ(leaves.size(), 5u);
  std::vector<int> w;
  for (const auto& l : leaves) w.push_back(l.weight);
  EXPECT_EQ(w, (std::vector<int>{3, 4, 3, 3, 4}));
  AlgNum total(ctx, 0L);
  for (const auto& l : leaves) total += AlgNum::beta_pow(ctx, -l.weight);
  EXPECT_TRUE(total == AlgNum(ctx, 1L));
  EXPECT_THROW(partition_leaves(ctx, 2), domain_error);
  EXPECT_THROW(partition_leaves(ctx, 30, 100), resource_error);
}

TEST(Layers, PartitionTiles) {
  for (auto [n, q, M] : {std::tuple{2, 1, 10}, {3, 2, 6}, {4, 3, 6}}) {
    auto ctx = make_context(n, q);
    auto leaves = partition_leaves(ctx, M);
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      EXPECT_GE(leaves[i].weight, M);
      EXPECT_LE(leaves[i].weight, M + n - 1);
      EXPECT_TRUE(leaves[i].left == layer_point(ctx, leaves[i].index));
      auto right = leaves[i].left + AlgNum::beta_pow(ctx, -leaves[i].weight);
      if (i + 1 < leaves.size())
        EXPECT_TRUE(right == leaves[i + 1].left);
      else
        EXPECT_TRUE(right == AlgNum(ctx, 1L));
    }
  }
}

TEST(Layers, LipschitzApproximation) {
  auto ctx = make_context(2, 1);
  const double b = ctx->beta_float();
  auto fx = approximate_lipschitz(ctx, [](const AlgNum& x) { return x; }, 6);
  auto ff = to_float(fx);
  double sup = 0;
  auto br = ff.breakpoints();
  for (std::size_t i = 0; i < ff.cells(); ++i) sup = std::max(sup, br[i + 1] - ff.values()[i]);
  EXPECT_LE(sup, std::pow(b, -6) * (1 + 1e-12));
  auto fc = approximate_lipschitz(ctx, [](const AlgNum&) { return 0.25; }, 6);
  EXPECT_EQ(fc.cells(), 1u);
  auto fs = approximate_lipschitz_float(ctx, [](double x) { return std::sin(x); }, 10);
  double err = 0;
  for (int k = 0; k < 100000; ++k) {
    const double x = (k + 0.5) / 100000;
    err = std::max(err, std::fabs(std::sin(x) - fs.eval(x)));
  }
  EXPECT_LE(err, std::pow(b, -10));
}

TEST(Layers, DecayFixedPointAndF1) {
  auto ctx = make_context(2, 1);
  auto u1 = invariant_density(ctx).u1;
  auto r0 = iterate_transfer(u1, 10);
  for (auto [N, e] : r0.errors) EXPECT_EQ(e, 0.0);
  auto r1 = iterate_transfer(red_basis(ctx, 1), 30);
  const double l2 = r1.lambda2_mod;
  for (int N = 5; N < 30; ++N) {
    const double ratio = r1.errors[N + 1].second / r1.errors[N].second;
    EXPECT_NEAR(ratio, l2, 1e-9);
  }
  EXPECT_NEAR(r1.fitted_rate, std::log(l2), 0.05);
}

TEST(Layers, DecayFallback) {
  auto ctx = make_context(3, 2);
  auto f = approximate_lipschitz(ctx, [](const AlgNum& x) { return x * x; }, 5);
  auto exact = iterate_transfer(f, 12);
  ASSERT_GT(exact.max_value_bits, 4u);
  auto forced = iterate_transfer(f, 12, std::nullopt, exact.max_value_bits / 2);
  EXPECT_EQ(exact.fallback_at, -1);
  EXPECT_GE(forced.fallback_at, 0);
  for (std::size_t i = 0; i < exact.errors.size(); ++i)
    EXPECT_NEAR(exact.errors[i].second, forced.errors[i].second, 1e-14 * (1 + exact.errors[i].second));
}
