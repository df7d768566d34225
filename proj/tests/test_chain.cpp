#include <gtest/gtest.h>

#include "dnahm/dnahm.hpp"
#include "oracles.hpp"

using namespace dnahm;

namespace {

// Random BA data with Hermitian positive gammas (no equations imposed).
BAChain random_ba(oracle::Rng& rng, std::size_t k, std::size_t n_sites, int origin = 0) {
  BAChain ba;
  ba.k = k;
  ba.origin = origin;
  for (std::size_t i = 0; i < n_sites; ++i) ba.betas.push_back(rng.matrix(k, k, 0.3));
  for (std::size_t i = 0; i + 1 < n_sites; ++i) ba.gammas.push_back(rng.invertible(k, 0.2));
  return ba;
}

BAChain evolved_ba(std::size_t k, std::uint64_t seed, std::size_t steps) {
  return evolve(fixtures::random_reality_seed(k, seed, 0.05), steps).chain;
}

}  // namespace

TEST(FromBraamAustin, ScalarExample) {
  BAChain ba{1, 0, {CMatrix{{cplx(0, 5)}}, CMatrix{{cplx(0, 5)}}}, {CMatrix{{2.0}}}};
  const DNChain dn = from_braam_austin(ba);
  EXPECT_EQ(dn.sites[0].A(0, 0), cplx(0, -5));
  EXPECT_EQ(dn.sites[0].D(0, 0), cplx(0, -5));
  EXPECT_EQ(dn.links[0].Pplus(0, 0), cplx(2.0));
  EXPECT_EQ(dn.links[0].Pminus(0, 0), cplx(-2.0));
  EXPECT_NEAR(std::abs(dn.sites[0].B(0, 0) - cplx(-29.0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(dn.sites[1].B(0, 0) - cplx(-29.0)), 0.0, 1e-14);
}

TEST(FromBraamAustin, ZeroBetaIdentityGamma) {
  BAChain ba{2, 0, {CMatrix(2, 2), CMatrix(2, 2), CMatrix(2, 2)}, {CMatrix::identity(2), CMatrix::identity(2)}};
  const DNChain dn = from_braam_austin(ba);
  for (const auto& s : dn.sites) {
    EXPECT_EQ(s.A.max_abs(), 0.0);
    EXPECT_EQ(s.D.max_abs(), 0.0);
    EXPECT_EQ(s.B, -CMatrix::identity(2));
  }
  EXPECT_EQ(dn.links[0].Pplus, CMatrix::identity(2));
  EXPECT_EQ(dn.links[0].Pminus, -CMatrix::identity(2));
}

TEST(FromBraamAustin, SingularGammaRefused) {
  BAChain ba{2, 0, {CMatrix(2, 2), CMatrix(2, 2)}, {CMatrix{{1.0, 1.0}, {1.0, 1.0}}}};
  try {
    from_braam_austin(ba);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularGamma);
  }
}

TEST(FromBraamAustin, RoundTripRandom) {
  oracle::Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const BAChain ba = random_ba(rng, 2 + trial % 2, 5, trial - 3);
    const BAChain back = to_braam_austin(from_braam_austin(ba));
    EXPECT_EQ(back.origin, ba.origin);
    for (std::size_t i = 0; i < ba.betas.size(); ++i) EXPECT_LT(max_abs_diff(back.betas[i], ba.betas[i]), 1e-13);
    for (std::size_t i = 0; i < ba.gammas.size(); ++i) EXPECT_LT(max_abs_diff(back.gammas[i], ba.gammas[i]), 1e-13);
  }
}

TEST(FromBraamAustin, ResidualEquivalence) {
  // BA residuals vanish <=> DN residuals vanish, on solutions and on junk.
  for (std::uint64_t s = 0; s < 6; ++s) {
    const BAChain ba = evolved_ba(2 + s % 2, s, 6);
    const auto bar = max_ba_residuals(ba);
    EXPECT_LT(std::max(bar.eq11, bar.eq12), 1e-12);
    EXPECT_LT(max_dn_residual(from_braam_austin(ba)), 1e-12);
  }
  oracle::Rng rng(2);
  const BAChain junk = random_ba(rng, 2, 4);
  const auto jr = max_ba_residuals(junk);
  const DNChain jdn = from_braam_austin(junk);
  double comm = 0.0, bsplit = 0.0;
  for (const auto& r : dn_residuals(jdn)) comm = std::max({comm, r.commA, r.commD});
  for (int r = jdn.first_index() + 1; r < jdn.last_index(); ++r) bsplit = std::max(bsplit, reconstruct_B(jdn, r).mismatch);
  // commA is the eq11 residual verbatim; the B split equals the eq12 residual.
  EXPECT_NEAR(comm, jr.eq11, 1e-12);
  EXPECT_NEAR(bsplit, jr.eq12, 1e-12);
  EXPECT_GT(jr.eq11, 1e-3);
}

TEST(ToBraamAustin, RefusesTrigWithoutGauge) {
  const auto t = fixtures::trig_solution(1.0);
  try {
    to_braam_austin(t.chain);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotRealityCompatible);
    EXPECT_GT(e.value(), 0.1);
  }
}

TEST(ToBraamAustin, AcceptsTrigAfterMetricGauge) {
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    const auto t = fixtures::trig_solution(p);
    const DNChain g = apply_gauge(t.chain, metric_square_roots(t.metric));
    const BAChain ba = to_braam_austin(g);
    EXPECT_EQ(ba.betas.size(), t.chain.size());
    const auto r = max_ba_residuals(ba);
    EXPECT_LT(std::max(r.eq11, r.eq12), 1e-13);
  }
}

TEST(ReconstructB, ScalarConsistency) {
  const cplx a(0.5, 1.0), d(-0.2, 0.3), pp(1.5, 0.0), pm(-0.7, 0.1);
  const DNLink l{0, CMatrix{{pp}}, CMatrix{{pm}}};
  const auto rec = reconstruct_B(CMatrix{{a}}, CMatrix{{d}}, &l, &l);
  EXPECT_NEAR(std::abs((*rec.B_right)(0, 0) - (pm * pp + a * d)), 0.0, 1e-15);
  EXPECT_EQ(rec.mismatch, 0.0);
}

TEST(ReconstructB, TrigIdentity) {
  const auto t = fixtures::trig_solution(2.0);
  EXPECT_LT(reconstruct_B(t.chain, 2).mismatch, 1e-14);
  EXPECT_LT(reconstruct_B(t.chain, 3).mismatch, 1e-14);
}

TEST(ReconstructB, RandomMatchesBruteForce) {
  oracle::Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 2 + trial % 2;
    const CMatrix A = rng.matrix(k, k), D = rng.matrix(k, k);
    const DNLink left{0, rng.matrix(k, k), rng.matrix(k, k)};
    const DNLink right{1, rng.matrix(k, k), rng.matrix(k, k)};
    const auto rec = reconstruct_B(A, D, &left, &right);
    double brute = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        cplx bl = 0.0, br = 0.0;
        for (std::size_t m = 0; m < k; ++m) {
          bl += left.Pplus(i, m) * left.Pminus(m, j) + D(i, m) * A(m, j);
          br += right.Pminus(i, m) * right.Pplus(m, j) + A(i, m) * D(m, j);
        }
        brute = std::max(brute, std::abs(bl - br));
      }
    }
    EXPECT_GT(rec.mismatch, 0.0);
    EXPECT_NEAR(rec.mismatch, brute, 1e-13);
  }
}

TEST(DnResiduals, TrigSolutionVanishes) {
  for (double p : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0}) {
    EXPECT_LT(max_dn_residual(fixtures::trig_solution(p).chain), 1e-13) << "p=" << p;
  }
}

TEST(DnResiduals, ScalarChainZero) {
  const DNChain c = fixtures::scalar_solution(cplx(0, -3), -13.0, cplx(0, -3), -2.0, 2.0, 5);
  for (const auto& r : dn_residuals(c)) EXPECT_EQ(r.max(), 0.0);
}

TEST(DnResiduals, PerturbationDetected) {
  const auto t = fixtures::trig_solution(2.0);
  DNChain c = t.chain;
  c.sites[0].A = c.sites[0].A.with_entry(0, 1, c.sites[0].A(0, 1) + 1e-3);
  EXPECT_GE(max_dn_residual(c), 1e-4);
}

TEST(DnResiduals, ComponentsMatchFormulas) {
  oracle::Rng rng(31);
  DNChain c;
  c.k = 2;
  for (int r = 0; r < 2; ++r) c.sites.push_back({r, rng.matrix(2, 2), rng.matrix(2, 2), rng.matrix(2, 2)});
  c.links.push_back({0, rng.matrix(2, 2), rng.matrix(2, 2)});
  const auto res = dn_residuals(c).front();
  const auto& l = c.links[0];
  const auto& a = c.sites[0];
  const auto& b = c.sites[1];
  EXPECT_DOUBLE_EQ(res.commA, oracle::max_abs(l.Pminus * b.A - a.A * l.Pminus));
  EXPECT_DOUBLE_EQ(res.commD, oracle::max_abs(l.Pplus * a.D - b.D * l.Pplus));
  EXPECT_DOUBLE_EQ(res.bLeft, oracle::max_abs(a.B - l.Pminus * l.Pplus - a.A * a.D));
  EXPECT_DOUBLE_EQ(res.bRight, oracle::max_abs(b.B - l.Pplus * l.Pminus - b.D * b.A));
}

TEST(BaResiduals, ScalarConstantsVanish) {
  const CMatrix b{{cplx(0.3, -1.0)}}, g{{2.0}};
  const BAChain ba{1, 0, {b, b, b, b}, {g, g, g}};
  const auto r = max_ba_residuals(ba);
  EXPECT_EQ(r.eq11, 0.0);
  EXPECT_EQ(r.eq12, 0.0);
}

TEST(ApplyGauge, IdentityAndScalar) {
  const auto t = fixtures::trig_solution(1.5);
  const DNChain same = apply_gauge(t.chain, std::vector<CMatrix>(t.chain.size(), CMatrix::identity(2)));
  for (std::size_t i = 0; i < same.size(); ++i) EXPECT_LT(max_abs_diff(same.sites[i].A, t.chain.sites[i].A), 1e-16);
  const DNChain sc = fixtures::scalar_solution(0.5, 1.0 + 0.25, 0.5, 1.0, 1.0, 4);
  std::vector<CMatrix> g;
  for (int i = 0; i < 4; ++i) g.push_back(CMatrix{{cplx(1.0 + i, 0.5 * i)}});
  const DNChain gs = apply_gauge(sc, g);
  EXPECT_LT(max_dn_residual(gs), 1e-15);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_LT(max_abs_diff(gs.sites[i].B, sc.sites[i].B), 1e-15);
}

TEST(ApplyGauge, SingularGaugeRefused) {
  const auto t = fixtures::trig_solution(1.0);
  std::vector<CMatrix> g{CMatrix::identity(2), CMatrix(2, 2)};
  try {
    apply_gauge(t.chain, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularGauge);
  }
}

TEST(ApplyGauge, RandomGaugePreservesSolutions) {
  oracle::Rng rng(41);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const std::size_t k = 2 + s % 2;
    const DNChain c = from_braam_austin(evolved_ba(k, s, 5));
    std::vector<CMatrix> g;
    double cond = 1.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      g.push_back(rng.invertible(k));
      cond = std::max(cond, condition_number(g.back()));
    }
    const DNChain gc = apply_gauge(c, g);
    EXPECT_LT(max_dn_residual(gc), 1e-10 * cond);
    for (std::size_t i = 0; i < c.size(); ++i) {
      EXPECT_LT(surface_distance(char_surface(gc.sites[i]), char_surface(c.sites[i])), 1e-11 * cond);
    }
  }
}

TEST(ApplyGauge, TrigMetricRootKeepsSurface) {
  const auto t = fixtures::trig_solution(2.0);
  const DNChain g = apply_gauge(t.chain, metric_square_roots(t.metric));
  EXPECT_LT(standard_reality_deviation(g), 1e-14);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_LT(surface_distance(char_surface(g.sites[i]), char_surface(t.chain.sites[i])), 1e-13);
  }
}

TEST(RealityResidual, TrigWithPublishedMetric) {
  const auto t = fixtures::trig_solution(1.0);
  EXPECT_LT(reality_residual(t.chain, t.metric), 1e-13);
  EXPECT_GT(reality_residual(t.chain, identity_metric(t.chain)), 0.1);
}

TEST(RealityResidual, BaChainsRealWithIdentityMetric) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const DNChain c = from_braam_austin(evolved_ba(3, s, 4));
    EXPECT_LT(reality_residual(c, identity_metric(c)), 1e-13);
  }
}

TEST(RealityResidual, InvalidMetricRefused) {
  const auto t = fixtures::trig_solution(1.0);
  MetricSequence bad{{CMatrix::identity(2), CMatrix::diagonal({1.0, -1.0})}};
  try {
    reality_residual(t.chain, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidMetric);
  }
  MetricSequence short_metric{{CMatrix::identity(2)}};
  EXPECT_THROW(reality_residual(t.chain, short_metric), Error);
}

TEST(DNChain, ValidateCatchesBadShapes) {
  DNChain c = fixtures::trig_solution(1.0).chain;
  c.links.clear();
  EXPECT_THROW(c.validate(), Error);
  DNChain d = fixtures::trig_solution(1.0).chain;
  d.sites[1].r = 5;
  EXPECT_THROW(d.validate(), Error);
}
