#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <string>

#include "dnahm/chain.hpp"

namespace dnahm {

inline constexpr double kBreakdownTol = 1e-10;

enum class StepStatus { Advanced, Breakdown };

struct StepOutcome {
  StepStatus status = StepStatus::Breakdown;
  double lambda_min = 0.0;
  std::optional<CMatrix> gamma;  // gamma_next (forward) or gamma_prev (backward)
  std::optional<CMatrix> beta;   // beta_next (forward) or beta_cur (backward)
};

namespace detail {

inline CMatrix checked_inverse(const CMatrix& gamma, const char* what) {
  try {
    return inverse(gamma, 1e-12);
  } catch (const Error& e) {
    throw Error(ErrorCode::SingularGamma, std::string(what) + " is not invertible", e.value());
  }
}

inline StepOutcome gauge_fixed_root(const CMatrix& H, double tol, CMatrix beta) {
  StepOutcome out;
  const HermitianEig eig = hermitian_eig(hermitian_part(H), 1e-12);
  out.lambda_min = eig.values.front();
  out.beta = std::move(beta);
  if (out.lambda_min <= tol * H.max_abs()) {
    out.status = StepStatus::Breakdown;
    return out;
  }
  out.status = StepStatus::Advanced;
  out.gamma = positive_sqrt(hermitian_part(H), 0.0);
  return out;
}

}  // namespace detail

/// One forward step: gamma_next = sqrt(gamma^H gamma + [beta^H, beta]) and
/// beta_next = gamma_next^-1 beta gamma_next.
inline StepOutcome step_forward(const CMatrix& gamma_prev, const CMatrix& beta_cur, double tol = kBreakdownTol) {
  detail::checked_inverse(gamma_prev, "gamma_prev");
  const CMatrix H = gamma_prev.adjoint() * gamma_prev + commutator(beta_cur.adjoint(), beta_cur);
  StepOutcome out = detail::gauge_fixed_root(H, tol, beta_cur);
  if (out.status == StepStatus::Advanced) {
    out.beta = inverse(*out.gamma) * beta_cur * *out.gamma;
  } else {
    out.beta.reset();
  }
  return out;
}

/// Mirror of step_forward: beta_cur = gamma beta_next gamma^-1, then
/// gamma_prev = sqrt(gamma gamma^H - [beta_cur^H, beta_cur]).
inline StepOutcome step_backward(const CMatrix& gamma_next, const CMatrix& beta_next, double tol = kBreakdownTol) {
  const CMatrix ginv = detail::checked_inverse(gamma_next, "gamma_next");
  const CMatrix beta_cur = gamma_next * beta_next * ginv;
  const CMatrix H = gamma_next * gamma_next.adjoint() - commutator(beta_cur.adjoint(), beta_cur);
  return detail::gauge_fixed_root(H, tol, beta_cur);
}

/// Seed data: the site-0 beta together with the gamma on the link leaving
/// site 0 in the direction of travel.
struct Seed {
  CMatrix gamma;
  CMatrix beta;
};

enum class Direction { Forward, Backward };

struct EvolveResult {
  BAChain chain;
  std::optional<std::size_t> breakdown_at;  // index of the failing positivity step
  double lambda_min = std::numeric_limits<double>::infinity();  // over all positivity steps
};

/// Builds n_steps links (n_steps + 1 sites) from the seed, or stops at the
/// first failed positivity step.
inline EvolveResult evolve(const Seed& seed, std::size_t n_steps, double tol = kBreakdownTol,
                           Direction dir = Direction::Forward) {
  if (seed.gamma.rows() != seed.beta.rows() || !seed.gamma.is_square() || !seed.beta.is_square()) {
    throw Error(ErrorCode::DimensionMismatch, "seed gamma and beta must be square of equal size");
  }
  if (n_steps == 0) throw Error(ErrorCode::InvalidChain, "evolve needs at least one step");
  const std::size_t k = seed.gamma.rows();
  EvolveResult res;
  res.chain.k = k;

  if (dir == Direction::Forward) {
    const CMatrix ginv = detail::checked_inverse(seed.gamma, "seed gamma");
    std::vector<CMatrix>& betas = res.chain.betas;
    std::vector<CMatrix>& gammas = res.chain.gammas;
    betas.push_back(seed.beta);
    gammas.push_back(seed.gamma);
    betas.push_back(ginv * seed.beta * seed.gamma);
    for (std::size_t step = 0; step + 1 < n_steps; ++step) {
      const StepOutcome o = step_forward(gammas.back(), betas.back(), tol);
      res.lambda_min = std::min(res.lambda_min, o.lambda_min);
      if (o.status == StepStatus::Breakdown) {
        res.breakdown_at = step;
        break;
      }
      gammas.push_back(*o.gamma);
      betas.push_back(*o.beta);
    }
    res.chain.origin = 0;
    return res;
  }

  // Backward: collect right to left, then reverse.
  std::vector<CMatrix> betas{seed.beta};
  std::vector<CMatrix> gammas{seed.gamma};
  for (std::size_t step = 0;; ++step) {
    if (step + 1 == n_steps) {
      const CMatrix ginv = detail::checked_inverse(gammas.back(), "gamma");
      betas.push_back(gammas.back() * betas.back() * ginv);
      break;
    }
    const StepOutcome o = step_backward(gammas.back(), betas.back(), tol);
    res.lambda_min = std::min(res.lambda_min, o.lambda_min);
    if (o.status == StepStatus::Breakdown) {
      betas.push_back(*o.beta);
      res.breakdown_at = step;
      break;
    }
    betas.push_back(*o.beta);
    gammas.push_back(*o.gamma);
  }
  std::reverse(betas.begin(), betas.end());
  std::reverse(gammas.begin(), gammas.end());
  res.chain.betas = std::move(betas);
  res.chain.gammas = std::move(gammas);
  res.chain.origin = -static_cast<int>(res.chain.gammas.size());
  return res;
}

/// Seed whose site-0 triple is (A, B, D): gamma0 = sqrt(AD - B), beta0 = -A.
/// Only the reality class D = -A^H, B = B^H is accepted.
inline Seed seed_from_triple(const CMatrix& A, const CMatrix& B, const CMatrix& D, double tol = 1e-9) {
  if (!A.is_square() || A.rows() != B.rows() || A.rows() != D.rows() || !B.is_square() || !D.is_square()) {
    throw Error(ErrorCode::DimensionMismatch, "triple must be square of equal size");
  }
  const double scale = std::max({1.0, A.max_abs(), B.max_abs(), D.max_abs()});
  const double dev_d = (D + A.adjoint()).max_abs();
  if (dev_d > tol * scale) {
    throw Error(ErrorCode::NotHermitian, "D deviates from -A^H by " + std::to_string(dev_d), dev_d);
  }
  const double dev_b = hermitian_defect(B);
  if (dev_b > tol * scale) {
    throw Error(ErrorCode::NotHermitian, "B deviates from B^H by " + std::to_string(dev_b), dev_b);
  }
  const CMatrix H = A * D - B;
  const double dev_h = hermitian_defect(H);
  if (dev_h > tol * scale) {
    throw Error(ErrorCode::NotHermitian, "AD - B is not Hermitian", dev_h);
  }
  return {positive_sqrt(hermitian_part(H), tol), -A};
}

}  // namespace dnahm
