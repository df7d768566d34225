#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "dnahm/chain.hpp"
#include "dnahm/spectral.hpp"

namespace dnahm {

struct NahmTriple {
  CMatrix T1, T2, T3;

  std::size_t k() const { return T1.rows(); }
};

/// Complex form in the T0 = 0 gauge: sigma = i T1, tau = T2 + i T3.
struct NahmState {
  double z = 0.0;
  CMatrix sigma, tau;
};

inline const cplx kI{0.0, 1.0};

inline CMatrix skew_part(const CMatrix& t) { return 0.5 * (t - t.adjoint()); }

inline double skew_defect(const NahmTriple& t) {
  return std::max({(t.T1 + t.T1.adjoint()).max_abs(), (t.T2 + t.T2.adjoint()).max_abs(),
                   (t.T3 + t.T3.adjoint()).max_abs()});
}

inline NahmState to_state(const NahmTriple& t, double z = 0.0) { return {z, kI * t.T1, t.T2 + kI * t.T3}; }

inline NahmTriple to_triple(const NahmState& s) {
  return {-kI * s.sigma, 0.5 * (s.tau - s.tau.adjoint()), (-0.5 * kI) * (s.tau + s.tau.adjoint())};
}

struct NahmDerivative {
  CMatrix dsigma, dtau;
};

/// dtau = [sigma, tau], dsigma = 1/2 ([sigma, sigma^H] + [tau, tau^H]).
inline NahmDerivative nahm_rhs(const NahmState& s) {
  if (!s.sigma.is_square() || s.sigma.rows() != s.tau.rows() || !s.tau.is_square()) {
    throw Error(ErrorCode::DimensionMismatch, "sigma and tau must be square of equal size");
  }
  return {0.5 * (commutator(s.sigma, s.sigma.adjoint()) + commutator(s.tau, s.tau.adjoint())),
          commutator(s.sigma, s.tau)};
}

/// dT1 = [T2, T3] and cyclic.
inline NahmTriple triple_rhs(const NahmTriple& t) {
  if (t.T1.rows() != t.T2.rows() || t.T1.rows() != t.T3.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "triple components differ in size");
  }
  return {commutator(t.T2, t.T3), commutator(t.T3, t.T1), commutator(t.T1, t.T2)};
}

struct Trajectory {
  double z0 = 0.0;
  double dz = 0.0;
  std::vector<NahmTriple> nodes;
  double max_skew_drift = 0.0;  // largest pre-projection skew defect

  double z1() const { return z0 + dz * static_cast<double>(nodes.size() - 1); }

  /// Linear interpolation between nodes.
  NahmTriple at(double z) const {
    const double slack = 1e-9 * std::max(1.0, std::abs(dz));
    if (z < z0 - slack || z > z1() + slack) {
      throw Error(ErrorCode::RangeNotCovered, "z = " + std::to_string(z) + " outside trajectory", z);
    }
    const std::size_t n = nodes.size() - 1;
    const double x = (z - z0) / dz;
    std::size_t i = static_cast<std::size_t>(std::clamp(std::floor(x + 1e-9), 0.0, static_cast<double>(n)));
    if (i >= n) i = n - 1;
    const double t = std::clamp(x - static_cast<double>(i), 0.0, 1.0);
    const NahmTriple& a = nodes[i];
    const NahmTriple& b = nodes[i + 1];
    return {(1.0 - t) * a.T1 + t * b.T1, (1.0 - t) * a.T2 + t * b.T2, (1.0 - t) * a.T3 + t * b.T3};
  }
};

namespace detail {

inline NahmTriple axpy(const NahmTriple& x, double a, const NahmTriple& d) {
  return {x.T1 + a * d.T1, x.T2 + a * d.T2, x.T3 + a * d.T3};
}

}  // namespace detail

/// Classical RK4 with a skew-hermitian projection after every step.
inline Trajectory integrate_nahm(const NahmTriple& initial, double z0, double z1, std::size_t n_steps) {
  if (n_steps == 0) throw Error(ErrorCode::InvalidStepList, "n_steps must be positive");
  if (skew_defect(initial) > 1e-12 * std::max(1.0, std::max({initial.T1.max_abs(), initial.T2.max_abs(),
                                                               initial.T3.max_abs()}))) {
    throw Error(ErrorCode::NotHermitian, "initial data is not skew-hermitian", skew_defect(initial));
  }
  Trajectory tr;
  tr.z0 = z0;
  tr.dz = (z1 - z0) / static_cast<double>(n_steps);
  tr.nodes.reserve(n_steps + 1);
  tr.nodes.push_back(initial);
  const double h = tr.dz;
  for (std::size_t s = 0; s < n_steps; ++s) {
    const NahmTriple& x = tr.nodes.back();
    const NahmTriple k1 = triple_rhs(x);
    const NahmTriple k2 = triple_rhs(detail::axpy(x, 0.5 * h, k1));
    const NahmTriple k3 = triple_rhs(detail::axpy(x, 0.5 * h, k2));
    const NahmTriple k4 = triple_rhs(detail::axpy(x, h, k3));
    const NahmTriple next{x.T1 + (h / 6.0) * (k1.T1 + 2.0 * k2.T1 + 2.0 * k3.T1 + k4.T1),
                          x.T2 + (h / 6.0) * (k1.T2 + 2.0 * k2.T2 + 2.0 * k3.T2 + k4.T2),
                          x.T3 + (h / 6.0) * (k1.T3 + 2.0 * k2.T3 + 2.0 * k3.T3 + k4.T3)};
    tr.max_skew_drift = std::max(tr.max_skew_drift, skew_defect(next));
    tr.nodes.push_back({skew_part(next.T1), skew_part(next.T2), skew_part(next.T3)});
  }
  return tr;
}

/// Coefficients of det(eta - A(zeta)), A(zeta) = (T1 + iT2) - 2iT3 zeta + (T1 - iT2) zeta^2;
/// c[i][j] multiplies eta^i zeta^j.
inline BivariatePoly conserved_coefficients(const NahmTriple& t) {
  const std::size_t k = t.k();
  const CMatrix a0 = t.T1 + kI * t.T2;
  const CMatrix a1 = (-2.0 * kI) * t.T3;
  const CMatrix a2 = t.T1 - kI * t.T2;
  return interpolate_bivariate(
      [&](cplx eta, cplx zeta) {
        return determinant(CMatrix::generate(k, k, [&](std::size_t i, std::size_t j) {
          return (i == j ? eta : cplx(0.0)) - (a0(i, j) + zeta * a1(i, j) + zeta * zeta * a2(i, j));
        }));
      },
      k, 2 * k);
}

inline double coefficient_distance(const BivariatePoly& a, const BivariatePoly& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.c.size(); ++i)
    for (std::size_t j = 0; j < a.c[i].size(); ++j) d = std::max(d, std::abs(a.c[i][j] - b.c[i][j]));
  return d;
}

/// Max drift of the conserved coefficients along a trajectory.
inline double conserved_drift(const Trajectory& tr) {
  const BivariatePoly ref = conserved_coefficients(tr.nodes.front());
  double d = 0.0;
  for (const auto& n : tr.nodes) d = std::max(d, coefficient_distance(ref, conserved_coefficients(n)));
  return d;
}

/// BA chain on sites first..last with beta_r^H = tau(2hr) and
/// gamma_r^H = 1/(2h) + sigma(h(2r+1)).
inline BAChain embed(const Trajectory& tr, double h, int first, int last) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidStepList, "h must be positive", h);
  if (last <= first) throw Error(ErrorCode::ChainTooShort, "need at least two sites");
  const std::size_t k = tr.nodes.front().k();
  BAChain ba;
  ba.k = k;
  ba.origin = first;
  const CMatrix half = (1.0 / (2.0 * h)) * CMatrix::identity(k);
  for (int r = first; r <= last; ++r) {
    const NahmState s = to_state(tr.at(2.0 * h * r));
    ba.betas.push_back(s.tau.adjoint());
    if (r < last) {
      const NahmState m = to_state(tr.at(h * (2.0 * r + 1.0)));
      ba.gammas.push_back((half + m.sigma).adjoint());
    }
  }
  return ba;
}

struct ScalingRow {
  double h = 0.0;
  double R11 = 0.0;
  double R12 = 0.0;
  std::optional<double> ratio11;
  std::optional<double> ratio12;
};

/// Residual table over h_list (strictly decreasing, positive) on z in [0, z_max].
/// A ratio is omitted when the previous residual sits at rounding level.
/// `jobs` > 1 evaluates the h values on worker threads; results do not depend on it.
inline std::vector<ScalingRow> residual_scaling(const NahmTriple& initial, const std::vector<double>& h_list,
                                                std::size_t n_steps = 2000, double z_max = 1.0,
                                                std::size_t jobs = 1) {
  if (h_list.empty()) throw Error(ErrorCode::InvalidStepList, "empty h list");
  for (std::size_t i = 0; i < h_list.size(); ++i) {
    if (!(h_list[i] > 0.0) || !std::isfinite(h_list[i])) {
      throw Error(ErrorCode::InvalidStepList, "h values must be positive", h_list[i]);
    }
    if (i > 0 && !(h_list[i] < h_list[i - 1])) {
      throw Error(ErrorCode::InvalidStepList, "h values must be strictly decreasing", h_list[i]);
    }
    if (2.0 * h_list[i] > z_max) throw Error(ErrorCode::InvalidStepList, "h too large for the range", h_list[i]);
  }
  const Trajectory tr = integrate_nahm(initial, 0.0, z_max, n_steps);
  std::vector<BAResidualSummary> res(h_list.size());
  auto work = [&](std::size_t i) {
    const int last = static_cast<int>(std::floor(z_max / (2.0 * h_list[i]) + 1e-9));
    res[i] = max_ba_residuals(embed(tr, h_list[i], 0, last));
  };
  if (jobs <= 1 || h_list.size() == 1) {
    for (std::size_t i = 0; i < h_list.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(jobs, h_list.size()); ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < h_list.size(); i = next++) work(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  std::vector<ScalingRow> rows;
  for (std::size_t i = 0; i < h_list.size(); ++i) {
    ScalingRow row{h_list[i], res[i].eq11, res[i].eq12, std::nullopt, std::nullopt};
    if (!rows.empty()) {
      const ScalingRow& prev = rows.back();
      const double floor = 64.0 * kEps * std::pow(1.0 / (2.0 * prev.h), 2.0);
      if (prev.R11 > floor) row.ratio11 = row.R11 / prev.R11;
      if (prev.R12 > floor) row.ratio12 = row.R12 / prev.R12;
    }
    rows.push_back(row);
  }
  return rows;
}

inline CMatrix pauli(int i) {
  switch (i) {
    case 1: return CMatrix{{0.0, 1.0}, {1.0, 0.0}};
    case 2: return CMatrix{{0.0, -kI}, {kI, 0.0}};
    case 3: return CMatrix{{1.0, 0.0}, {0.0, -1.0}};
    default: throw Error(ErrorCode::DimensionMismatch, "Pauli index must be 1..3");
  }
}

/// T_i = -(i/2) f_i sigma_i: the su(2) reduction, which obeys f1' = f2 f3 and cyclic.
inline NahmTriple euler_top(double f1, double f2, double f3) {
  const cplx c = -0.5 * kI;
  return {(c * f1) * pauli(1), (c * f2) * pauli(2), (c * f3) * pauli(3)};
}

/// Recovers (f1, f2, f3) from su(2) data.
inline std::array<double, 3> euler_top_amplitudes(const NahmTriple& t) {
  return {(kI * t.T1)(0, 1).real() * 2.0, -(kI * t.T2)(0, 1).imag() * 2.0, (kI * t.T3)(0, 0).real() * 2.0};
}

/// Random skew-hermitian u(k) triple, entries of size ~ scale.
inline NahmTriple random_nahm_triple(std::size_t k, std::uint64_t seed, double scale = 0.15) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  auto draw = [&] {
    const CMatrix x = CMatrix::generate(k, k, [&](std::size_t, std::size_t) { return cplx(n01(rng), n01(rng)); });
    return scale * skew_part(x);
  };
  NahmTriple t;
  t.T1 = draw();
  t.T2 = draw();
  t.T3 = draw();
  return t;
}

}  // namespace dnahm
