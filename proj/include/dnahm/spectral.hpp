#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "dnahm/chain.hpp"

namespace dnahm {

/// Coefficient grid of a polynomial in two variables: c[i][j] multiplies
/// x^i y^j, with i <= deg_x and j <= deg_y.
struct BivariatePoly {
  std::size_t deg_x = 0;
  std::size_t deg_y = 0;
  std::vector<std::vector<cplx>> c;

  cplx operator()(cplx x, cplx y) const {
    cplx acc = 0.0;
    for (std::size_t i = deg_x + 1; i-- > 0;) {
      cplx row = 0.0;
      for (std::size_t j = deg_y + 1; j-- > 0;) row = row * y + c[i][j];
      acc = acc * x + row;
    }
    return acc;
  }
};

/// Recovers the coefficients of f from its values on the tensor grid of
/// roots of unity (orders deg_x + 1 and deg_y + 1) by the inverse DFT.
template <class F>
BivariatePoly interpolate_bivariate(F&& f, std::size_t deg_x, std::size_t deg_y) {
  const std::size_t nx = deg_x + 1, ny = deg_y + 1;
  auto root = [](std::size_t m, std::size_t n) {
    return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(m % n) / static_cast<double>(n));
  };
  std::vector<std::vector<cplx>> vals(nx, std::vector<cplx>(ny));
  for (std::size_t a = 0; a < nx; ++a)
    for (std::size_t b = 0; b < ny; ++b) vals[a][b] = f(root(a, nx), root(b, ny));

  BivariatePoly p;
  p.deg_x = deg_x;
  p.deg_y = deg_y;
  p.c.assign(nx, std::vector<cplx>(ny));
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      cplx s = 0.0;
      for (std::size_t a = 0; a < nx; ++a)
        for (std::size_t b = 0; b < ny; ++b) s += vals[a][b] * std::conj(root(i * a, nx) * root(j * b, ny));
      p.c[i][j] = s / static_cast<double>(nx * ny);
    }
  }
  return p;
}

/// c[i][j] multiplies eta^i zeta^j in det(eta zeta A + eta B + zeta + D).
struct SpectralSurface {
  std::size_t k = 0;
  std::vector<std::vector<cplx>> c;

  cplx operator()(cplx eta, cplx zeta) const { return as_poly()(eta, zeta); }

  BivariatePoly as_poly() const { return {k, k, c}; }

  double max_abs() const {
    double m = 0.0;
    for (const auto& row : c)
      for (const auto& z : row) m = std::max(m, std::abs(z));
    return m;
  }

  /// Sum of |c_ij| |eta|^i |zeta|^j: the natural size of F at a point.
  double evaluation_scale(cplx eta, cplx zeta) const {
    double s = 0.0;
    for (std::size_t i = 0; i <= k; ++i)
      for (std::size_t j = 0; j <= k; ++j)
        s += std::abs(c[i][j]) * std::pow(std::abs(eta), static_cast<double>(i)) *
             std::pow(std::abs(zeta), static_cast<double>(j));
    return s;
  }

  void validate() const {
    if (c.size() != k + 1) throw Error(ErrorCode::InvalidSurface, "grid must be (k+1)x(k+1)");
    for (const auto& row : c)
      if (row.size() != k + 1) throw Error(ErrorCode::InvalidSurface, "grid must be (k+1)x(k+1)");
  }
};

inline CMatrix spectral_matrix(const CMatrix& A, const CMatrix& B, const CMatrix& D, cplx eta, cplx zeta) {
  return CMatrix::generate(A.rows(), A.cols(), [&](std::size_t i, std::size_t j) {
    return eta * zeta * A(i, j) + eta * B(i, j) + (i == j ? zeta : cplx(0.0)) + D(i, j);
  });
}

inline SpectralSurface char_surface(const CMatrix& A, const CMatrix& B, const CMatrix& D) {
  if (!A.is_square() || A.rows() != B.rows() || A.rows() != D.rows() || !B.is_square() || !D.is_square()) {
    throw Error(ErrorCode::DimensionMismatch, "char_surface needs square matrices of equal size");
  }
  const std::size_t k = A.rows();
  const BivariatePoly p = interpolate_bivariate(
      [&](cplx eta, cplx zeta) { return determinant(spectral_matrix(A, B, D, eta, zeta)); }, k, k);
  SpectralSurface s{k, p.c};
  s.c[0][k] = 1.0;
  return s;
}

inline SpectralSurface char_surface(const DNSite& site) { return char_surface(site.A, site.B, site.D); }

inline double surface_distance(const SpectralSurface& a, const SpectralSurface& b) {
  if (a.k != b.k) throw Error(ErrorCode::DimensionMismatch, "surfaces of different charge");
  double d = 0.0;
  for (std::size_t i = 0; i <= a.k; ++i)
    for (std::size_t j = 0; j <= a.k; ++j) d = std::max(d, std::abs(a.c[i][j] - b.c[i][j]));
  return d;
}

inline std::vector<SpectralSurface> surface_series(const DNChain& chain) {
  chain.validate();
  std::vector<SpectralSurface> out;
  for (const auto& s : chain.sites) out.push_back(char_surface(s));
  return out;
}

/// Per-site distance of each surface from the first site's surface.
inline std::vector<double> drift_series(const DNChain& chain) {
  const auto surfaces = surface_series(chain);
  std::vector<double> out;
  for (const auto& s : surfaces) out.push_back(surface_distance(s, surfaces.front()));
  return out;
}

/// Max over sites of ||c(r) - c(r0)||_max.
inline double invariance_drift(const DNChain& chain) {
  if (chain.size() < 2) throw Error(ErrorCode::ChainTooShort, "drift needs at least two sites");
  const auto d = drift_series(chain);
  return *std::max_element(d.begin(), d.end());
}

/// Drift divided by max(1, max |c(r0)|).
inline double relative_invariance_drift(const DNChain& chain) {
  const double d = invariance_drift(chain);
  return d / std::max(1.0, char_surface(chain.sites.front()).max_abs());
}

// ---------------------------------------------------------------------------
// Curve diagnostics

struct CurvePoint {
  cplx eta;
  cplx zeta;
};

struct CurveSampling {
  std::vector<CurvePoint> points;
  std::vector<cplx> degenerate_etas;  // slices where the zeta-degree collapses
};

/// zeta-polynomial coefficients of F(eta, .) (ascending).
inline CVector zeta_slice(const SpectralSurface& s, cplx eta) {
  CVector q(s.k + 1);
  for (std::size_t j = 0; j <= s.k; ++j) {
    cplx v = 0.0;
    for (std::size_t i = s.k + 1; i-- > 0;) v = v * eta + s.c[i][j];
    q[j] = v;
  }
  return q;
}

/// k zeta-roots over each of n_eta values eta = radius * exp(i (2 pi m / n + offset)).
inline CurveSampling curve_samples(const SpectralSurface& s, std::size_t n_eta, double radius = 1.0,
                                   double offset = 0.0) {
  s.validate();
  CurveSampling out;
  for (std::size_t m = 0; m < n_eta; ++m) {
    const cplx eta = std::polar(
        radius, 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n_eta) + offset);
    const CVector q = zeta_slice(s, eta);
    CVector roots;
    try {
      roots = poly_roots(q);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateLeadingCoefficient) throw;
      out.degenerate_etas.push_back(eta);
      continue;
    }
    for (const auto& z : roots) out.points.push_back({eta, z});
  }
  return out;
}

struct Gradient {
  cplx d_eta;
  cplx d_zeta;
  double norm() const { return std::sqrt(std::norm(d_eta) + std::norm(d_zeta)); }
};

inline cplx ipow(cplx z, std::size_t n) {
  cplx r = 1.0;
  for (std::size_t i = 0; i < n; ++i) r *= z;
  return r;
}

inline Gradient surface_gradient(const SpectralSurface& s, cplx eta, cplx zeta) {
  Gradient g{0.0, 0.0};
  for (std::size_t i = 0; i <= s.k; ++i) {
    for (std::size_t j = 0; j <= s.k; ++j) {
      const cplx c = s.c[i][j];
      if (i > 0) g.d_eta += c * static_cast<double>(i) * ipow(eta, i - 1) * ipow(zeta, j);
      if (j > 0) g.d_zeta += c * static_cast<double>(j) * ipow(eta, i) * ipow(zeta, j - 1);
    }
  }
  return g;
}

struct SmoothnessReport {
  double min_gradient = std::numeric_limits<double>::infinity();
  std::vector<CurvePoint> flagged;
};

inline SmoothnessReport smoothness_report(const SpectralSurface& s, const std::vector<CurvePoint>& samples,
                                          double rel_tol = 1e-6) {
  SmoothnessReport rep;
  const double threshold = rel_tol * s.max_abs();
  for (const auto& p : samples) {
    const double g = surface_gradient(s, p.eta, p.zeta).norm();
    rep.min_gradient = std::min(rep.min_gradient, g);
    if (g < threshold) rep.flagged.push_back(p);
  }
  return rep;
}

inline bool on_curve(const SpectralSurface& s, const CurvePoint& p, double rel_tol = 1e-8) {
  return std::abs(s(p.eta, p.zeta)) <= rel_tol * std::max(s.evaluation_scale(p.eta, p.zeta), s.max_abs());
}

/// Size of the terms of M(eta, zeta), used as the zero reference for its singular values.
inline double spectral_matrix_scale(const CMatrix& A, const CMatrix& B, const CMatrix& D, cplx eta, cplx zeta) {
  return std::abs(eta) * std::abs(zeta) * A.max_abs() + std::abs(eta) * B.max_abs() + std::abs(zeta) + D.max_abs();
}

/// Nullity of M(eta, zeta) at a point of the curve.
inline std::size_t cokernel_nullity(const CMatrix& A, const CMatrix& B, const CMatrix& D, const CurvePoint& p,
                                    double tol = 1e-9, double curve_tol = 1e-8) {
  const SpectralSurface s = char_surface(A, B, D);
  if (!on_curve(s, p, curve_tol)) {
    throw Error(ErrorCode::PointNotOnCurve, "|F| too large at the given point", std::abs(s(p.eta, p.zeta)));
  }
  return nullity(spectral_matrix(A, B, D, p.eta, p.zeta), tol, spectral_matrix_scale(A, B, D, p.eta, p.zeta)).count;
}

/// Sampled distance of the curve from the anti-diagonal zeta = -1/conj(eta),
/// measured in the max-norm homogeneous chart.
inline double antidiagonal_clearance(const SpectralSurface& s, std::size_t n,
                                     const std::vector<double>& radii = {0.5, 1.0, 2.0}) {
  s.validate();
  double best = std::numeric_limits<double>::infinity();
  for (double rho : radii) {
    for (std::size_t m = 0; m < n; ++m) {
      const cplx eta = std::polar(rho, 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n));
      const cplx zeta = -1.0 / std::conj(eta);
      const double chart = std::pow(std::max(1.0, std::abs(eta)) * std::max(1.0, std::abs(zeta)),
                                    static_cast<double>(s.k));
      best = std::min(best, std::abs(s(eta, zeta)) / chart);
    }
  }
  return best;
}

/// det(eta zeta beta - eta (gamma_l^H gamma_l + beta^H beta) + zeta - beta^H)
/// for a BA site with left link gamma_l.
inline SpectralSurface ba_form_surface(const CMatrix& beta, const CMatrix& gamma_left) {
  const std::size_t k = beta.rows();
  const CMatrix mid = gamma_left.adjoint() * gamma_left + beta.adjoint() * beta;
  const CMatrix bh = beta.adjoint();
  const BivariatePoly p = interpolate_bivariate(
      [&](cplx eta, cplx zeta) {
        return determinant(CMatrix::generate(k, k, [&](std::size_t i, std::size_t j) {
          return eta * zeta * beta(i, j) - eta * mid(i, j) + (i == j ? zeta : cplx(0.0)) - bh(i, j);
        }));
      },
      k, k);
  SpectralSurface s{k, p.c};
  s.c[0][k] = 1.0;
  return s;
}

}  // namespace dnahm
