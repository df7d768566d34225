#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dnahm/spectral.hpp"

namespace dnahm {

/// Sequence f_r in V_r for r = origin .. origin + values.size() - 1.
struct WardSection {
  int origin = 0;
  std::vector<CVector> values;

  int last() const { return origin + static_cast<int>(values.size()) - 1; }
  const CVector& at(int r) const { return values.at(static_cast<std::size_t>(r - origin)); }
};

namespace detail {

inline void axpy(CVector& y, const CMatrix& m, const CVector& x) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    cplx s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * x[j];
    y[i] += s;
  }
}

inline void require_covered(const DNChain& chain, const WardSection& f, int lo, int hi) {
  if (f.values.empty() || f.origin > lo || f.last() < hi || lo < chain.first_index() || hi > chain.last_index()) {
    throw Error(ErrorCode::DimensionMismatch, "section does not cover the required sites");
  }
  for (const auto& v : f.values)
    if (v.size() != chain.k) throw Error(ErrorCode::DimensionMismatch, "section vector has wrong size");
}

}  // namespace detail

/// (W+ f)_r = P+_{r-1} f_{r-1} - (eta A_r + 1) f_r, on sites f.origin+1 .. f.last.
inline WardSection ward_plus(const DNChain& chain, cplx eta, const WardSection& f) {
  detail::require_covered(chain, f, f.origin, f.last());
  WardSection out;
  out.origin = f.origin + 1;
  for (int r = f.origin + 1; r <= f.last(); ++r) {
    const CVector& fr = f.at(r);
    CVector v(chain.k);
    detail::axpy(v, chain.link(r - 1).Pplus, f.at(r - 1));
    detail::axpy(v, -eta * chain.site(r).A, fr);
    for (std::size_t i = 0; i < chain.k; ++i) v[i] -= fr[i];
    out.values.push_back(std::move(v));
  }
  return out;
}

/// (W- f)_r = eta P-_{r+1} f_{r+1} + (zeta + D_r) f_r, on sites f.origin .. f.last-1.
inline WardSection ward_minus(const DNChain& chain, cplx eta, cplx zeta, const WardSection& f) {
  detail::require_covered(chain, f, f.origin, f.last());
  WardSection out;
  out.origin = f.origin;
  for (int r = f.origin; r < f.last(); ++r) {
    const CVector& fr = f.at(r);
    CVector v(chain.k);
    detail::axpy(v, eta * chain.link(r).Pminus, f.at(r + 1));
    detail::axpy(v, chain.site(r).D, fr);
    for (std::size_t i = 0; i < chain.k; ++i) v[i] += zeta * fr[i];
    out.values.push_back(std::move(v));
  }
  return out;
}

/// Unit section: e_j at site r, zero elsewhere on the chain.
inline WardSection basis_section(const DNChain& chain, int r, std::size_t j) {
  WardSection f;
  f.origin = chain.first_index();
  f.values.assign(chain.size(), CVector(chain.k));
  f.values[static_cast<std::size_t>(r - f.origin)][j] = 1.0;
  return f;
}

inline WardSection restrict_section(const WardSection& f, int lo, int hi) {
  WardSection out;
  out.origin = lo;
  for (int r = lo; r <= hi; ++r) out.values.push_back(f.at(r));
  return out;
}

/// max over unit sections f of ||[W+, W-] f||_max on the interior sites.
inline double commutator_residual(const DNChain& chain, cplx eta, cplx zeta) {
  chain.validate();
  if (chain.size() < 3) throw Error(ErrorCode::ChainTooShort, "commutator needs at least three sites");
  const int lo = chain.first_index() + 1, hi = chain.last_index() - 1;
  double res = 0.0;
  for (const auto& s : chain.sites) {
    // a unit section at s only reaches s-1..s+1, so a window of radius 2 suffices
    const int a = std::max(chain.first_index(), s.r - 2), b = std::min(chain.last_index(), s.r + 2);
    for (std::size_t j = 0; j < chain.k; ++j) {
      WardSection f;
      f.origin = a;
      f.values.assign(static_cast<std::size_t>(b - a + 1), CVector(chain.k));
      f.values[static_cast<std::size_t>(s.r - a)][j] = 1.0;
      const WardSection pm = ward_plus(chain, eta, ward_minus(chain, eta, zeta, f));
      const WardSection mp = ward_minus(chain, eta, zeta, ward_plus(chain, eta, f));
      for (int r = std::max(lo, a + 1); r <= std::min(hi, b - 1); ++r) {
        const CVector& a = pm.at(r);
        const CVector& b = mp.at(r);
        for (std::size_t i = 0; i < chain.k; ++i) res = std::max(res, std::abs(a[i] - b[i]));
      }
    }
  }
  return res;
}

enum class Ordering { PlusMinus, MinusPlus };

/// max over unit sections of ||M_r f_r - [eta P- W+ + P+ W- - W+ W-] f at r||;
/// MinusPlus replaces the last term by W- W+.
inline double m_factorization_residual(const DNChain& chain, int r, cplx eta, cplx zeta,
                                       Ordering ordering = Ordering::PlusMinus) {
  chain.validate();
  if (chain.size() < 3) throw Error(ErrorCode::ChainTooShort, "factorization needs at least three sites");
  if (r <= chain.first_index() || r >= chain.last_index()) {
    throw Error(ErrorCode::InvalidSite, "site " + std::to_string(r) + " is not interior");
  }
  const DNSite& site = chain.site(r);
  const CMatrix M = spectral_matrix(site.A, site.B, site.D, eta, zeta);
  double res = 0.0;
  for (int s = r - 1; s <= r + 1; ++s) {
    for (std::size_t j = 0; j < chain.k; ++j) {
      const WardSection f = basis_section(chain, s, j);
      const WardSection wp = ward_plus(chain, eta, f);
      const WardSection wm = ward_minus(chain, eta, zeta, f);
      CVector rhs(chain.k);
      detail::axpy(rhs, eta * chain.link(r).Pminus, wp.at(r + 1));
      detail::axpy(rhs, chain.link(r - 1).Pplus, wm.at(r - 1));
      const WardSection second = ordering == Ordering::PlusMinus ? ward_plus(chain, eta, wm)
                                                                 : ward_minus(chain, eta, zeta, wp);
      const CVector& sec = second.at(r);
      CVector lhs(chain.k);
      detail::axpy(lhs, M, f.at(r));
      for (std::size_t i = 0; i < chain.k; ++i) res = std::max(res, std::abs(lhs[i] - (rhs[i] - sec[i])));
    }
  }
  return res;
}

struct DualTransport {
  CVector g_next;  // left null covector of M_{r+1}
  CVector g;       // transported covector at r
  double residual = 0.0;
};

/// Transports a left null covector of M_{r+1} across the link (r, r+1) and
/// measures ||g_r^t M_r|| / ||g_r||.
inline DualTransport transport_dual_covector(const DNChain& chain, int r, const CurvePoint& p, double tol = 1e-9) {
  chain.validate();
  if (std::abs(p.eta) <= 1e-8) throw Error(ErrorCode::EtaNearZero, "|eta| too small", std::abs(p.eta));
  const DNSite& right = chain.site(r + 1);
  const DNSite& left = chain.site(r);
  const DNLink& link = chain.link(r);
  const CMatrix M_next = spectral_matrix(right.A, right.B, right.D, p.eta, p.zeta);
  const Nullity nl = nullity(M_next.transpose(), tol, spectral_matrix_scale(right.A, right.B, right.D, p.eta, p.zeta));
  if (nl.count == 0) {
    const SVD d = svd(M_next);
    throw Error(ErrorCode::PointNotOnCurve, "M_{r+1} has trivial cokernel",
                d.values.back() / std::max(d.values.front(), kEps));
  }
  CMatrix pm_inv;
  try {
    pm_inv = inverse(link.Pminus, 1e-12);
  } catch (const Error& e) {
    throw Error(ErrorCode::SingularPminus, "P- on link " + std::to_string(r) + " is not invertible", e.value());
  }
  DualTransport out;
  out.g_next = nl.basis.column_vector(0);
  const CMatrix step = CMatrix::generate(chain.k, chain.k, [&](std::size_t i, std::size_t j) {
    return (i == j ? p.zeta : cplx(0.0)) + right.D(i, j);
  });
  const CVector t = left_multiply(left_multiply(out.g_next, step), pm_inv);
  out.g.resize(chain.k);
  for (std::size_t i = 0; i < chain.k; ++i) out.g[i] = -t[i] / p.eta;
  const CMatrix M_cur = spectral_matrix(left.A, left.B, left.D, p.eta, p.zeta);
  out.residual = norm2(left_multiply(out.g, M_cur)) / norm2(out.g);
  return out;
}

inline double dual_transport_check(const DNChain& chain, int r, const CurvePoint& p, double tol = 1e-9) {
  return transport_dual_covector(chain, r, p, tol).residual;
}

}  // namespace dnahm
