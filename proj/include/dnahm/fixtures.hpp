#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "dnahm/chain.hpp"
#include "dnahm/evolution.hpp"

namespace dnahm::fixtures {

struct TrigParams {
  double p = 1.0;
  double phi = std::numbers::pi / 4.0;
  int last = 2;  // sites run 1..last = 2p
};

inline TrigParams trig_params(double p) {
  const double two_p = 2.0 * p;
  if (!(p > 0.0) || !std::isfinite(p) || std::abs(two_p - std::round(two_p)) > 1e-12) {
    throw Error(ErrorCode::InvalidMass, "2p must be a positive integer", p);
  }
  return {p, std::numbers::pi / (2.0 * p + 2.0), static_cast<int>(std::lround(two_p))};
}

struct TrigSolution {
  DNChain chain;
  MetricSequence metric;
  TrigParams params;
};

/// Closed-form k = 2 solution on sites 1..2p with s_j = sin(j phi).
inline TrigSolution trig_solution(double p) {
  const TrigParams tp = trig_params(p);
  auto sn = [&](int j) { return std::sin(j * tp.phi); };
  const double s = sn(1);
  TrigSolution out;
  out.params = tp;
  out.chain.k = 2;
  for (int r = 1; r <= tp.last; ++r) {
    const CMatrix A{{0.0, -s / sn(r + 1)}, {0.0, 0.0}};
    const CMatrix B = CMatrix::diagonal({-sn(r + 1) / sn(r), -sn(r) / sn(r + 1)});
    const CMatrix D{{0.0, 0.0}, {s / sn(r), 0.0}};
    out.chain.sites.push_back({r, A, B, D});
    out.metric.g.push_back(CMatrix::diagonal({sn(r + 1), sn(r)}));
    if (r < tp.last) {
      out.chain.links.push_back({r, CMatrix::diagonal({1.0, sn(r) / sn(r + 1)}),
                                 CMatrix::diagonal({-sn(r + 2) / sn(r + 1), -1.0})});
    }
  }
  return out;
}

struct BoundaryRanks {
  std::size_t left = 0;   // rank(B_first - D_first A_first)
  std::size_t right = 0;  // rank(B_last - A_last D_last)
};

inline BoundaryRanks boundary_rank_check(const DNChain& chain, double tol = 1e-9) {
  if (chain.sites.empty()) throw Error(ErrorCode::InvalidChain, "chain has no sites");
  const DNSite& f = chain.sites.front();
  const DNSite& l = chain.sites.back();
  return {numerical_rank(f.B - f.D * f.A, tol), numerical_rank(l.B - l.A * l.D, tol)};
}

/// Constant k = 1 chain on sites 0..length-1.
inline DNChain scalar_solution(cplx a, cplx b, cplx d, cplx p_minus, cplx p_plus, std::size_t length,
                               double tol = 1e-12) {
  if (length == 0) throw Error(ErrorCode::InvalidChain, "length must be positive");
  const cplx expected = p_minus * p_plus + a * d;
  const double scale = std::max({1.0, std::abs(a), std::abs(b), std::abs(d), std::abs(p_minus), std::abs(p_plus)});
  if (std::abs(b - expected) > tol * scale * scale) {
    throw Error(ErrorCode::InconsistentScalars, "b must equal p- p+ + a d", std::abs(b - expected));
  }
  DNChain chain;
  chain.k = 1;
  for (std::size_t r = 0; r < length; ++r) {
    chain.sites.push_back({static_cast<int>(r), CMatrix{{a}}, CMatrix{{b}}, CMatrix{{d}}});
    if (r + 1 < length) chain.links.push_back({static_cast<int>(r), CMatrix{{p_plus}}, CMatrix{{p_minus}}});
  }
  return chain;
}

/// Deterministic seed: beta entries uniform in the disc of radius `spread`,
/// gamma = I + spread X X^H / k. The spread halves until the first forward
/// step is positive.
inline Seed random_reality_seed(std::size_t k, std::uint64_t seed, double spread, int max_retries = 100) {
  if (k == 0) throw Error(ErrorCode::DimensionMismatch, "k must be positive");
  if (!(spread >= 0.0)) throw Error(ErrorCode::InvalidChain, "spread must be non-negative", spread);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const CMatrix beta_unit = CMatrix::generate(k, k, [&](std::size_t, std::size_t) {
    const double rad = std::sqrt(u01(rng));
    const double ang = 2.0 * std::numbers::pi * u01(rng);
    return std::polar(rad, ang);
  });
  const CMatrix x = CMatrix::generate(k, k, [&](std::size_t, std::size_t) { return cplx(u01(rng), u01(rng)); });
  const CMatrix xxh = (1.0 / static_cast<double>(k)) * (x * x.adjoint());
  const CMatrix id = CMatrix::identity(k);
  double sp = spread;
  for (int attempt = 0; attempt <= max_retries; ++attempt, sp *= 0.5) {
    const Seed s{id + sp * xxh, sp * beta_unit};
    const CMatrix beta1 = inverse(s.gamma) * s.beta * s.gamma;
    if (step_forward(s.gamma, beta1).status == StepStatus::Advanced) return s;
  }
  throw Error(ErrorCode::SeedExhausted, "no positive first step after shrinking the spread", sp);
}

}  // namespace dnahm::fixtures
