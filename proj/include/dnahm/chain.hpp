#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dnahm/numlin.hpp"

namespace dnahm {

struct DNSite {
  int r = 0;
  CMatrix A, B, D;
};

/// Link between sites `from` and `from + 1`. Pplus maps V_from -> V_from+1,
/// Pminus maps V_from+1 -> V_from.
struct DNLink {
  int from = 0;
  CMatrix Pplus, Pminus;
};

struct DNChain {
  std::size_t k = 0;
  std::vector<DNSite> sites;
  std::vector<DNLink> links;

  int first_index() const { return sites.front().r; }
  int last_index() const { return sites.back().r; }
  std::size_t size() const { return sites.size(); }

  const DNSite& site(int r) const {
    if (sites.empty() || r < first_index() || r > last_index()) {
      throw Error(ErrorCode::InvalidSite, "site " + std::to_string(r) + " outside chain");
    }
    return sites[static_cast<std::size_t>(r - first_index())];
  }

  /// Link (r, r+1).
  const DNLink& link(int r) const {
    if (sites.empty() || r < first_index() || r >= last_index()) {
      throw Error(ErrorCode::InvalidSite, "link " + std::to_string(r) + " outside chain");
    }
    return links[static_cast<std::size_t>(r - first_index())];
  }

  void validate() const {
    if (sites.empty()) throw Error(ErrorCode::InvalidChain, "chain has no sites");
    if (links.size() + 1 != sites.size()) throw Error(ErrorCode::InvalidChain, "links must number sites - 1");
    auto check = [&](const CMatrix& m, const char* what) {
      if (m.rows() != k || m.cols() != k) {
        throw Error(ErrorCode::DimensionMismatch, std::string(what) + " is not " + std::to_string(k) + "x" +
                                                      std::to_string(k));
      }
    };
    for (std::size_t i = 0; i < sites.size(); ++i) {
      if (sites[i].r != sites.front().r + static_cast<int>(i)) {
        throw Error(ErrorCode::InvalidChain, "site indices must be consecutive");
      }
      check(sites[i].A, "A");
      check(sites[i].B, "B");
      check(sites[i].D, "D");
    }
    for (std::size_t i = 0; i < links.size(); ++i) {
      if (links[i].from != sites[i].r) throw Error(ErrorCode::InvalidChain, "link index out of step with sites");
      check(links[i].Pplus, "Pplus");
      check(links[i].Pminus, "Pminus");
    }
  }
};

/// Braam-Austin data: betas[j] lives on site origin + j, gammas[j] on the
/// link (origin + j, origin + j + 1).
struct BAChain {
  std::size_t k = 0;
  int origin = 0;
  std::vector<CMatrix> betas;
  std::vector<CMatrix> gammas;

  void validate() const {
    if (betas.empty()) throw Error(ErrorCode::InvalidChain, "BA chain has no sites");
    if (gammas.size() + 1 != betas.size()) throw Error(ErrorCode::InvalidChain, "gammas must number betas - 1");
    auto check = [&](const CMatrix& m) {
      if (m.rows() != k || m.cols() != k) throw Error(ErrorCode::DimensionMismatch, "BA matrix has wrong size");
    };
    for (const auto& b : betas) check(b);
    for (const auto& g : gammas) check(g);
  }
};

struct MetricSequence {
  std::vector<CMatrix> g;  // aligned with the chain's sites
};

inline double chain_scale(const DNChain& chain) {
  double s = 0.0;
  for (const auto& st : chain.sites) s = std::max({s, st.A.max_abs(), st.B.max_abs(), st.D.max_abs()});
  for (const auto& l : chain.links) s = std::max({s, l.Pplus.max_abs(), l.Pminus.max_abs()});
  return s;
}

// ---------------------------------------------------------------------------

struct BReconstruction {
  std::optional<CMatrix> B_left;   // P+_{r-1} P-_r + D_r A_r
  std::optional<CMatrix> B_right;  // P-_{r+1} P+_r + A_r D_r
  double mismatch = 0.0;
};

inline BReconstruction reconstruct_B(const CMatrix& A, const CMatrix& D, const DNLink* left, const DNLink* right) {
  BReconstruction out;
  if (left) out.B_left = left->Pplus * left->Pminus + D * A;
  if (right) out.B_right = right->Pminus * right->Pplus + A * D;
  if (out.B_left && out.B_right) out.mismatch = max_abs_diff(*out.B_left, *out.B_right);
  return out;
}

inline BReconstruction reconstruct_B(const DNChain& chain, int r) {
  const DNSite& s = chain.site(r);
  const DNLink* left = r > chain.first_index() ? &chain.link(r - 1) : nullptr;
  const DNLink* right = r < chain.last_index() ? &chain.link(r) : nullptr;
  return reconstruct_B(s.A, s.D, left, right);
}

struct LinkResidual {
  int from = 0;
  double commA = 0.0;   // ||P- A_{r+1} - A_r P-||
  double commD = 0.0;   // ||P+ D_r - D_{r+1} P+||
  double bLeft = 0.0;   // ||B_r - (P- P+ + A_r D_r)||
  double bRight = 0.0;  // ||B_{r+1} - (P+ P- + D_{r+1} A_{r+1})||

  double max() const { return std::max({commA, commD, bLeft, bRight}); }
};

inline std::vector<LinkResidual> dn_residuals(const DNChain& chain) {
  chain.validate();
  std::vector<LinkResidual> out;
  for (const auto& l : chain.links) {
    const DNSite& a = chain.site(l.from);
    const DNSite& b = chain.site(l.from + 1);
    LinkResidual res;
    res.from = l.from;
    res.commA = (l.Pminus * b.A - a.A * l.Pminus).max_abs();
    res.commD = (l.Pplus * a.D - b.D * l.Pplus).max_abs();
    res.bLeft = (a.B - (l.Pminus * l.Pplus + a.A * a.D)).max_abs();
    res.bRight = (b.B - (l.Pplus * l.Pminus + b.D * b.A)).max_abs();
    out.push_back(res);
  }
  return out;
}

inline double max_dn_residual(const DNChain& chain) {
  double m = 0.0;
  for (const auto& r : dn_residuals(chain)) m = std::max(m, r.max());
  return m;
}

struct BAResidual {
  int index = 0;  // site index of beta_i
  std::optional<double> eq11;  // ||beta_i gamma - gamma beta_{i+1}|| on the right link
  std::optional<double> eq12;  // ||g_{-}^H g_{-} - g_{+} g_{+}^H + [beta^H, beta]|| at interior sites
};

inline std::vector<BAResidual> ba_residuals(const BAChain& ba) {
  ba.validate();
  std::vector<BAResidual> out;
  const std::size_t n = ba.betas.size();
  for (std::size_t j = 0; j < n; ++j) {
    BAResidual res;
    res.index = ba.origin + static_cast<int>(j);
    const CMatrix& beta = ba.betas[j];
    if (j + 1 < n) {
      const CMatrix& g = ba.gammas[j];
      res.eq11 = (beta * g - g * ba.betas[j + 1]).max_abs();
    }
    if (j > 0 && j + 1 < n) {
      const CMatrix& gl = ba.gammas[j - 1];
      const CMatrix& gr = ba.gammas[j];
      res.eq12 = (gl.adjoint() * gl - gr * gr.adjoint() + commutator(beta.adjoint(), beta)).max_abs();
    }
    out.push_back(res);
  }
  return out;
}

struct BAResidualSummary {
  double eq11 = 0.0;
  double eq12 = 0.0;
};

inline BAResidualSummary max_ba_residuals(const BAChain& ba) {
  BAResidualSummary s;
  for (const auto& r : ba_residuals(ba)) {
    if (r.eq11) s.eq11 = std::max(s.eq11, *r.eq11);
    if (r.eq12) s.eq12 = std::max(s.eq12, *r.eq12);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Conversion between the two forms

inline DNChain from_braam_austin(const BAChain& ba, double cond_tol = 1e-9) {
  ba.validate();
  if (ba.betas.size() < 2) throw Error(ErrorCode::ChainTooShort, "a single BA site carries no gamma to fix B");
  for (std::size_t j = 0; j < ba.gammas.size(); ++j) {
    const SVD d = svd(ba.gammas[j]);
    const double smax = d.values.front();
    const double smin = d.values.back();
    if (smax == 0.0 || smin <= cond_tol * smax) {
      throw Error(ErrorCode::SingularGamma, "gamma on link " + std::to_string(ba.origin + static_cast<int>(j)) +
                                                " is numerically singular",
                  smin == 0.0 ? std::numeric_limits<double>::infinity() : smax / smin);
    }
  }
  DNChain chain;
  chain.k = ba.k;
  const std::size_t n = ba.betas.size();
  for (std::size_t j = 0; j + 1 < n; ++j) {
    chain.links.push_back({ba.origin + static_cast<int>(j), ba.gammas[j].adjoint(), -ba.gammas[j]});
  }
  for (std::size_t j = 0; j < n; ++j) {
    const int r = ba.origin + static_cast<int>(j);
    const CMatrix A = -ba.betas[j];
    const CMatrix D = ba.betas[j].adjoint();
    // Right link when present, left link at the last site.
    CMatrix B = j + 1 < n ? chain.links[j].Pminus * chain.links[j].Pplus + A * D
                          : chain.links[j - 1].Pplus * chain.links[j - 1].Pminus + D * A;
    chain.sites.push_back({r, A, B, D});
  }
  return chain;
}

/// Max deviation from the standard reality pattern D = -A^H, P+ = -(P-)^H.
inline double standard_reality_deviation(const DNChain& chain) {
  double dev = 0.0;
  for (const auto& s : chain.sites) dev = std::max(dev, (s.D + s.A.adjoint()).max_abs());
  for (const auto& l : chain.links) dev = std::max(dev, (l.Pplus + l.Pminus.adjoint()).max_abs());
  return dev;
}

inline BAChain to_braam_austin(const DNChain& chain, double tol = 1e-12) {
  chain.validate();
  const double dev = standard_reality_deviation(chain);
  if (dev > tol * std::max(1.0, chain_scale(chain))) {
    throw Error(ErrorCode::NotRealityCompatible, "max deviation " + std::to_string(dev), dev);
  }
  BAChain ba;
  ba.k = chain.k;
  ba.origin = chain.first_index();
  for (const auto& s : chain.sites) ba.betas.push_back(-s.A);
  for (const auto& l : chain.links) ba.gammas.push_back(-l.Pminus);
  return ba;
}

// ---------------------------------------------------------------------------
// Gauge action and reality

inline DNChain apply_gauge(const DNChain& chain, const std::vector<CMatrix>& g, double tol = 1e-12) {
  chain.validate();
  if (g.size() != chain.size()) throw Error(ErrorCode::DimensionMismatch, "one gauge matrix per site required");
  std::vector<CMatrix> ginv;
  ginv.reserve(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    try {
      ginv.push_back(inverse(g[i], tol));
    } catch (const Error& e) {
      throw Error(ErrorCode::SingularGauge, "gauge at site " + std::to_string(chain.sites[i].r) + " not invertible",
                  e.value());
    }
  }
  DNChain out;
  out.k = chain.k;
  for (std::size_t i = 0; i < chain.sites.size(); ++i) {
    const DNSite& s = chain.sites[i];
    out.sites.push_back({s.r, g[i] * s.A * ginv[i], g[i] * s.B * ginv[i], g[i] * s.D * ginv[i]});
  }
  for (std::size_t i = 0; i < chain.links.size(); ++i) {
    const DNLink& l = chain.links[i];
    out.links.push_back({l.from, g[i + 1] * l.Pplus * ginv[i], g[i] * l.Pminus * ginv[i + 1]});
  }
  return out;
}

/// Adjoint of X: V_a -> V_b with respect to metrics g_a, g_b.
inline CMatrix metric_adjoint(const CMatrix& x, const CMatrix& ga_inv, const CMatrix& gb) {
  return ga_inv * x.adjoint() * gb;
}

inline void validate_metric(const MetricSequence& metric, std::size_t n_sites, double tol = 1e-12) {
  if (metric.g.size() != n_sites) {
    throw Error(ErrorCode::InvalidMetric, "metric has " + std::to_string(metric.g.size()) + " entries for " +
                                              std::to_string(n_sites) + " sites");
  }
  for (const auto& g : metric.g) {
    try {
      const HermitianEig e = hermitian_eig(g, tol);
      if (e.values.front() <= tol * g.max_abs()) {
        throw Error(ErrorCode::InvalidMetric, "metric is not positive-definite", e.values.front());
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvalidMetric) throw;
      throw Error(ErrorCode::InvalidMetric, e.what(), e.value());
    }
  }
}

inline double reality_residual(const DNChain& chain, const MetricSequence& metric) {
  chain.validate();
  validate_metric(metric, chain.size());
  std::vector<CMatrix> ginv;
  for (const auto& g : metric.g) ginv.push_back(inverse(g));
  double res = 0.0;
  for (std::size_t i = 0; i < chain.sites.size(); ++i) {
    const DNSite& s = chain.sites[i];
    res = std::max(res, (s.A + metric_adjoint(s.D, ginv[i], metric.g[i])).max_abs());
    res = std::max(res, (s.B - metric_adjoint(s.B, ginv[i], metric.g[i])).max_abs());
  }
  for (std::size_t i = 0; i < chain.links.size(); ++i) {
    const DNLink& l = chain.links[i];
    // P- : V_{r+1} -> V_r, so its adjoint maps V_r -> V_{r+1}.
    res = std::max(res, (l.Pplus + metric_adjoint(l.Pminus, ginv[i + 1], metric.g[i])).max_abs());
  }
  return res;
}

inline MetricSequence identity_metric(const DNChain& chain) {
  MetricSequence m;
  m.g.assign(chain.size(), CMatrix::identity(chain.k));
  return m;
}

/// Gauge that turns metric reality into standard reality (g_r^{1/2}).
inline std::vector<CMatrix> metric_square_roots(const MetricSequence& metric) {
  std::vector<CMatrix> out;
  for (const auto& g : metric.g) out.push_back(positive_sqrt(g));
  return out;
}

}  // namespace dnahm
