#include <gtest/gtest.h>

#include "dnahm/dnahm.hpp"
#include "oracles.hpp"

using namespace dnahm;

TEST(StepForward, ScalarIsConstant) {
  const auto o = step_forward(CMatrix{{2.0}}, CMatrix{{cplx(0, 5)}});
  ASSERT_EQ(o.status, StepStatus::Advanced);
  EXPECT_NEAR(std::abs((*o.gamma)(0, 0) - 2.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs((*o.beta)(0, 0) - cplx(0, 5)), 0.0, 1e-14);
}

TEST(StepForward, BreakdownExample) {
  const auto o = step_forward(0.1 * CMatrix::identity(2), CMatrix{{0.0, 1.0}, {0.0, 0.0}});
  EXPECT_EQ(o.status, StepStatus::Breakdown);
  EXPECT_NEAR(o.lambda_min, -0.99, 1e-14);
  EXPECT_FALSE(o.gamma.has_value());
}

TEST(StepForward, SingularGammaRefused) {
  try {
    step_forward(CMatrix(2, 2), CMatrix::identity(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularGamma);
  }
}

TEST(StepForward, OutputsSatisfyBothEquations) {
  oracle::Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = 2 + trial % 3;
    const CMatrix gamma = positive_sqrt(rng.hermitian_pd(k, 1.0));
    const CMatrix beta = rng.matrix(k, k, 0.2);
    const auto o = step_forward(gamma, beta);
    ASSERT_EQ(o.status, StepStatus::Advanced);
    const CMatrix& g = *o.gamma;
    EXPECT_LT(hermitian_defect(g), 1e-14 * g.max_abs());
    EXPECT_GT(hermitian_eig(g).values.front(), 0.0);
    // beta g = g beta_next and gamma^H gamma - g g^H + [beta^H, beta] = 0
    EXPECT_LT((beta * g - g * *o.beta).max_abs(), 1e-12);
    EXPECT_LT((gamma.adjoint() * gamma - g * g.adjoint() + commutator(beta.adjoint(), beta)).max_abs(), 1e-12);
  }
}

TEST(StepBackward, InvertsStepForward) {
  oracle::Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = 1 + trial % 4;
    const CMatrix gamma = positive_sqrt(rng.hermitian_pd(k, 1.0));
    const CMatrix beta = rng.matrix(k, k, 0.2);
    const auto f = step_forward(gamma, beta);
    ASSERT_EQ(f.status, StepStatus::Advanced);
    const auto b = step_backward(*f.gamma, *f.beta);
    ASSERT_EQ(b.status, StepStatus::Advanced);
    EXPECT_LT(max_abs_diff(*b.gamma, gamma), 1e-11);
    EXPECT_LT(max_abs_diff(*b.beta, beta), 1e-11);
  }
}

TEST(StepBackward, ScalarIdentity) {
  const auto o = step_backward(CMatrix{{1.5}}, CMatrix{{cplx(-1, 2)}});
  ASSERT_EQ(o.status, StepStatus::Advanced);
  EXPECT_NEAR(std::abs((*o.gamma)(0, 0) - 1.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs((*o.beta)(0, 0) - cplx(-1, 2)), 0.0, 1e-15);
}

TEST(Evolve, ScalarSeedConstantChain) {
  const auto r = evolve(Seed{CMatrix{{2.0}}, CMatrix{{cplx(0, 5)}}}, 10);
  EXPECT_FALSE(r.breakdown_at.has_value());
  ASSERT_EQ(r.chain.betas.size(), 11u);
  ASSERT_EQ(r.chain.gammas.size(), 10u);
  for (const auto& b : r.chain.betas) EXPECT_NEAR(std::abs(b(0, 0) - cplx(0, 5)), 0.0, 1e-14);
  for (const auto& g : r.chain.gammas) EXPECT_NEAR(std::abs(g(0, 0) - 2.0), 0.0, 1e-15);
}

TEST(Evolve, BreakdownSeedReportsIndexZero) {
  const auto r = evolve(Seed{0.1 * CMatrix::identity(2), CMatrix{{0.0, 1.0}, {0.0, 0.0}}}, 5);
  ASSERT_TRUE(r.breakdown_at.has_value());
  EXPECT_EQ(*r.breakdown_at, 0u);
  EXPECT_NEAR(r.lambda_min, -0.99, 1e-14);
  EXPECT_EQ(r.chain.betas.size(), 2u);
  EXPECT_EQ(r.chain.gammas.size(), 1u);
}

TEST(Evolve, ProducedLinksSatisfyEquations) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const std::size_t k = 2 + s % 2;
    const auto r = evolve(fixtures::random_reality_seed(k, s, 0.05), 12);
    const auto res = max_ba_residuals(r.chain);
    double scale = 1.0;
    for (const auto& g : r.chain.gammas) scale = std::max(scale, g.max_abs() * g.max_abs());
    EXPECT_LT(std::max(res.eq11, res.eq12), 1e-11 * scale);
    for (std::size_t i = 1; i < r.chain.gammas.size(); ++i) {
      EXPECT_LT(hermitian_defect(r.chain.gammas[i]), 1e-14);
      EXPECT_GT(hermitian_eig(r.chain.gammas[i]).values.front(), 0.0);
    }
  }
}

TEST(Evolve, DeterministicBitForBit) {
  const Seed seed = fixtures::random_reality_seed(3, 42, 0.05);
  const auto a = evolve(seed, 15);
  const auto b = evolve(seed, 15);
  ASSERT_EQ(a.chain.betas.size(), b.chain.betas.size());
  for (std::size_t i = 0; i < a.chain.betas.size(); ++i) EXPECT_EQ(a.chain.betas[i], b.chain.betas[i]);
  for (std::size_t i = 0; i < a.chain.gammas.size(); ++i) EXPECT_EQ(a.chain.gammas[i], b.chain.gammas[i]);
}

TEST(Evolve, ForwardThenBackwardReturnsSeed) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const std::size_t k = 3;
    const Seed seed = fixtures::random_reality_seed(k, s, 0.05);
    const auto fwd = evolve(seed, 5);
    if (fwd.breakdown_at) continue;
    const auto bwd =
        evolve(Seed{fwd.chain.gammas.back(), fwd.chain.betas.back()}, 5, kBreakdownTol, Direction::Backward);
    ASSERT_FALSE(bwd.breakdown_at.has_value());
    EXPECT_EQ(bwd.chain.origin, -5);
    EXPECT_LT(max_abs_diff(bwd.chain.betas.front(), seed.beta), 1e-9);
    EXPECT_LT(max_abs_diff(bwd.chain.gammas.front(), seed.gamma), 1e-9);
    for (std::size_t i = 0; i < fwd.chain.betas.size(); ++i) {
      EXPECT_LT(max_abs_diff(bwd.chain.betas[i], fwd.chain.betas[i]), 1e-9);
    }
  }
}

TEST(Evolve, TrigRegeneratedFromFirstLink) {
  for (double p : {1.5, 2.0, 3.0}) {
    const auto t = fixtures::trig_solution(p);
    const DNChain g = apply_gauge(t.chain, metric_square_roots(t.metric));
    const BAChain ba = to_braam_austin(g);
    const auto r = evolve(Seed{ba.gammas[0], ba.betas[0]}, ba.gammas.size());
    ASSERT_FALSE(r.breakdown_at.has_value());
    const DNChain regen = from_braam_austin(r.chain);
    ASSERT_EQ(regen.size(), t.chain.size());
    for (std::size_t i = 0; i < regen.size(); ++i) {
      EXPECT_LT(surface_distance(char_surface(regen.sites[i]), char_surface(t.chain.sites[i])), 1e-10);
    }
  }
}

TEST(SeedFromTriple, ScalarReconstruction) {
  const Seed s = seed_from_triple(CMatrix{{cplx(0, -3)}}, CMatrix{{-13.0}}, CMatrix{{cplx(0, -3)}});
  EXPECT_NEAR(std::abs(s.gamma(0, 0) - 2.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(s.beta(0, 0) - cplx(0, 3)), 0.0, 1e-15);
}

TEST(SeedFromTriple, TrigRefusedUntwistedAcceptedGauged) {
  const auto t = fixtures::trig_solution(1.0);
  const DNSite& s = t.chain.sites[0];
  try {
    seed_from_triple(s.A, s.B, s.D);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotHermitian);
  }
  const DNChain g = apply_gauge(t.chain, metric_square_roots(t.metric));
  const DNSite& gs = g.sites[0];
  const Seed seed = seed_from_triple(gs.A, gs.B, gs.D);
  const DNChain regen = from_braam_austin(evolve(seed, 1).chain);
  EXPECT_LT(max_abs_diff(regen.sites[0].A, gs.A), 1e-12);
  EXPECT_LT(max_abs_diff(regen.sites[0].B, gs.B), 1e-12);
  EXPECT_LT(max_abs_diff(regen.sites[0].D, gs.D), 1e-12);
  EXPECT_LT(surface_distance(char_surface(regen.sites[1]), char_surface(t.chain.sites[1])), 1e-12);
}

TEST(SeedFromTriple, NotPositiveDefinite) {
  try {
    seed_from_triple(CMatrix(2, 2), CMatrix::identity(2), CMatrix(2, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPositiveDefinite);
  }
}

TEST(SeedFromTriple, RandomChainSiteRecoversLink) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto r = evolve(fixtures::random_reality_seed(3, s, 0.05), 4);
    const DNChain dn = from_braam_austin(r.chain);
    // interior gammas are in the positive gauge
    const DNSite& site = dn.sites[2];
    const Seed seed = seed_from_triple(site.A, site.B, site.D);
    EXPECT_LT(max_abs_diff(seed.gamma, r.chain.gammas[2]), 1e-11);
    EXPECT_LT(max_abs_diff(seed.beta, r.chain.betas[2]), 1e-15);
  }
}
