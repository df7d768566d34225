#pragma once

// Dense complex matrix kernel. Sizes here are small (the charge k is 2..10),
// so everything is plain row-major storage and robust O(n^3) algorithms.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dnahm/error.hpp"

namespace dnahm {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Immutable dense complex matrix, row-major. Entries are checked finite on
/// construction, so every CMatrix value in flight is NaN/Inf free.
class CMatrix {
 public:
  CMatrix() = default;

  CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
      throw Error(ErrorCode::DimensionMismatch,
                  "entry count " + std::to_string(data_.size()) + " != " +
                      std::to_string(rows_) + "x" + std::to_string(cols_));
    }
    for (const auto& z : data_) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw Error(ErrorCode::NonFinite, "matrix entry is not finite");
      }
    }
  }

  CMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    std::vector<cplx> entries;
    entries.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) throw Error(ErrorCode::DimensionMismatch, "ragged initializer");
      entries.insert(entries.end(), row.begin(), row.end());
    }
    *this = CMatrix(rows_, cols_, std::move(entries));
  }

  static CMatrix identity(std::size_t n) {
    std::vector<cplx> e(n * n);
    for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1.0;
    return CMatrix(n, n, std::move(e));
  }

  static CMatrix diagonal(std::span<const cplx> d) {
    const std::size_t n = d.size();
    std::vector<cplx> e(n * n);
    for (std::size_t i = 0; i < n; ++i) e[i * n + i] = d[i];
    return CMatrix(n, n, std::move(e));
  }

  static CMatrix diagonal(std::initializer_list<cplx> d) {
    return diagonal(std::span<const cplx>(d.begin(), d.size()));
  }

  static CMatrix column(std::span<const cplx> v) {
    return CMatrix(v.size(), 1, std::vector<cplx>(v.begin(), v.end()));
  }

  template <class F>
  static CMatrix generate(std::size_t rows, std::size_t cols, F&& f) {
    std::vector<cplx> e(rows * cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) e[i * cols + j] = f(i, j);
    return CMatrix(rows, cols, std::move(e));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const cplx> entries() const noexcept { return data_; }

  CMatrix with_entry(std::size_t i, std::size_t j, cplx value) const {
    std::vector<cplx> e = data_;
    e.at(i * cols_ + j) = value;
    return CMatrix(rows_, cols_, std::move(e));
  }

  CVector column_vector(std::size_t j) const {
    CVector v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
  }

  CMatrix adjoint() const {
    return generate(cols_, rows_, [&](std::size_t i, std::size_t j) { return std::conj((*this)(j, i)); });
  }

  CMatrix transpose() const {
    return generate(cols_, rows_, [&](std::size_t i, std::size_t j) { return (*this)(j, i); });
  }

  cplx trace() const {
    cplx t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  /// Largest entry modulus (the max-norm used for every tolerance here).
  double max_abs() const {
    double m = 0.0;
    for (const auto& z : data_) m = std::max(m, std::abs(z));
    return m;
  }

  double frobenius() const {
    double s = 0.0;
    for (const auto& z : data_) s += std::norm(z);
    return std::sqrt(s);
  }

  friend bool operator==(const CMatrix&, const CMatrix&) = default;

  friend CMatrix operator+(const CMatrix& a, const CMatrix& b) {
    require_same_shape(a, b);
    std::vector<cplx> e(a.data_.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = a.data_[i] + b.data_[i];
    return CMatrix(a.rows_, a.cols_, std::move(e));
  }

  friend CMatrix operator-(const CMatrix& a, const CMatrix& b) {
    require_same_shape(a, b);
    std::vector<cplx> e(a.data_.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = a.data_[i] - b.data_[i];
    return CMatrix(a.rows_, a.cols_, std::move(e));
  }

  friend CMatrix operator-(const CMatrix& a) {
    std::vector<cplx> e(a.data_.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = -a.data_[i];
    return CMatrix(a.rows_, a.cols_, std::move(e));
  }

  friend CMatrix operator*(cplx s, const CMatrix& a) {
    std::vector<cplx> e(a.data_.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = s * a.data_[i];
    return CMatrix(a.rows_, a.cols_, std::move(e));
  }

  friend CMatrix operator*(const CMatrix& a, cplx s) { return s * a; }

  friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.cols_ != b.rows_) {
      throw Error(ErrorCode::DimensionMismatch, "product of incompatible shapes");
    }
    std::vector<cplx> e(a.rows_ * b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t j = 0; j < b.cols_; ++j) {
        cplx s = 0.0;
        for (std::size_t l = 0; l < a.cols_; ++l) s += a(i, l) * b(l, j);
        e[i * b.cols_ + j] = s;
      }
    }
    return CMatrix(a.rows_, b.cols_, std::move(e));
  }

  friend CVector operator*(const CMatrix& a, std::span<const cplx> v) {
    if (a.cols_ != v.size()) throw Error(ErrorCode::DimensionMismatch, "matrix-vector shape");
    CVector out(a.rows_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      cplx s = 0.0;
      for (std::size_t l = 0; l < a.cols_; ++l) s += a(i, l) * v[l];
      out[i] = s;
    }
    return out;
  }

 private:
  static void require_same_shape(const CMatrix& a, const CMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) {
      throw Error(ErrorCode::DimensionMismatch, "elementwise op on different shapes");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

inline CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) { return (a - b).max_abs(); }

inline double max_abs(std::span<const cplx> v) {
  double m = 0.0;
  for (const auto& z : v) m = std::max(m, std::abs(z));
  return m;
}

inline double norm2(std::span<const cplx> v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

/// Row vector times matrix: returns v^t M (no conjugation).
inline CVector left_multiply(std::span<const cplx> v, const CMatrix& m) {
  if (v.size() != m.rows()) throw Error(ErrorCode::DimensionMismatch, "covector-matrix shape");
  CVector out(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) s += v[i] * m(i, j);
    out[j] = s;
  }
  return out;
}

/// Max-norm distance from Hermitian: ||H - H^H||_max.
inline double hermitian_defect(const CMatrix& h) {
  if (!h.is_square()) throw Error(ErrorCode::DimensionMismatch, "hermitian_defect needs a square matrix");
  double d = 0.0;
  for (std::size_t i = 0; i < h.rows(); ++i)
    for (std::size_t j = i; j < h.cols(); ++j) d = std::max(d, std::abs(h(i, j) - std::conj(h(j, i))));
  return d;
}

inline CMatrix hermitian_part(const CMatrix& h) { return 0.5 * (h + h.adjoint()); }

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition (cyclic complex Jacobi)

struct HermitianEig {
  std::vector<double> values;  // ascending
  CMatrix vectors;             // columns are orthonormal eigenvectors
};

inline HermitianEig hermitian_eig(const CMatrix& h, double tol = 1e-12) {
  if (!h.is_square()) throw Error(ErrorCode::DimensionMismatch, "hermitian_eig needs a square matrix");
  const std::size_t n = h.rows();
  const double scale = h.max_abs();
  const double defect = hermitian_defect(h);
  if (defect > tol * scale) {
    throw Error(ErrorCode::NotHermitian, "||H - H^H||_max = " + std::to_string(defect), defect);
  }

  std::vector<cplx> a(n * n);
  std::vector<cplx> v(n * n);
  auto A = [&](std::size_t i, std::size_t j) -> cplx& { return a[i * n + j]; };
  auto V = [&](std::size_t i, std::size_t j) -> cplx& { return v[i * n + j]; };
  for (std::size_t i = 0; i < n; ++i) {
    V(i, i) = 1.0;
    A(i, i) = h(i, i).real();
    for (std::size_t j = i + 1; j < n; ++j) {
      A(i, j) = 0.5 * (h(i, j) + std::conj(h(j, i)));
      A(j, i) = std::conj(A(i, j));
    }
  }

  const double fro = h.frobenius();
  constexpr int kMaxSweeps = 100;
  int sweep = 0;
  for (;; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::norm(A(p, q));
    if (std::sqrt(off) <= 2.0 * kEps * fro || off == 0.0) break;
    if (sweep == kMaxSweeps) {
      throw Error(ErrorCode::NoConvergence, "Jacobi sweep budget exhausted", std::sqrt(off));
    }
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = A(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) continue;
        const cplx phase = apq / mag;
        const double app = A(p, p).real();
        const double aqq = A(q, q).real();
        const double theta = (aqq - app) / (2.0 * mag);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // J = diag(1, conj(phase)) * [[c, s], [-s, c]] acting on (p, q).
        const cplx jpp = c;
        const cplx jpq = s;
        const cplx jqp = -s * std::conj(phase);
        const cplx jqq = c * std::conj(phase);
        for (std::size_t i = 0; i < n; ++i) {
          const cplx aip = A(i, p);
          const cplx aiq = A(i, q);
          A(i, p) = aip * jpp + aiq * jqp;
          A(i, q) = aip * jpq + aiq * jqq;
          const cplx vip = V(i, p);
          const cplx viq = V(i, q);
          V(i, p) = vip * jpp + viq * jqp;
          V(i, q) = vip * jpq + viq * jqq;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const cplx apj = A(p, j);
          const cplx aqj = A(q, j);
          A(p, j) = std::conj(jpp) * apj + std::conj(jqp) * aqj;
          A(q, j) = std::conj(jpq) * apj + std::conj(jqq) * aqj;
        }
        A(p, q) = 0.0;
        A(q, p) = 0.0;
        A(p, p) = A(p, p).real();
        A(q, q) = A(q, q).real();
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return A(x, x).real() < A(y, y).real(); });
  HermitianEig out;
  out.values.resize(n);
  for (std::size_t c = 0; c < n; ++c) out.values[c] = A(order[c], order[c]).real();
  out.vectors = CMatrix::generate(n, n, [&](std::size_t i, std::size_t c) { return V(i, order[c]); });
  return out;
}

/// Hermitian positive square root. NotPositiveDefinite carries lambda_min.
inline CMatrix positive_sqrt(const CMatrix& h, double tol = 1e-12) {
  const HermitianEig eig = hermitian_eig(h, tol);
  const double lambda_min = eig.values.empty() ? 0.0 : eig.values.front();
  if (eig.values.empty() || lambda_min <= tol * h.max_abs()) {
    throw Error(ErrorCode::NotPositiveDefinite, "lambda_min = " + std::to_string(lambda_min), lambda_min);
  }
  const std::size_t n = h.rows();
  const CMatrix& u = eig.vectors;
  const CMatrix r = CMatrix::generate(n, n, [&](std::size_t i, std::size_t j) {
    cplx s = 0.0;
    for (std::size_t l = 0; l < n; ++l) s += u(i, l) * std::sqrt(eig.values[l]) * std::conj(u(j, l));
    return s;
  });
  return hermitian_part(r);
}

// ---------------------------------------------------------------------------
// Singular value decomposition (one-sided Jacobi)

struct SVD {
  std::vector<double> values;  // descending
  CMatrix U;                   // m x n, columns for zero singular values are zero
  CMatrix V;                   // n x n unitary
};

inline SVD svd(const CMatrix& m) {
  const std::size_t rows = m.rows();
  const std::size_t n = m.cols();
  std::vector<CVector> w(n, CVector(rows));
  std::vector<CVector> v(n, CVector(n));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < rows; ++i) w[j][i] = m(i, j);
    v[j][j] = 1.0;
  }

  // columns at rounding level of the whole matrix are left alone
  const double negligible = std::pow(kEps * m.frobenius(), 2);
  constexpr int kMaxSweeps = 80;
  for (int sweep = 0;; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0;
        cplx g = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          alpha += std::norm(w[p][i]);
          beta += std::norm(w[q][i]);
          g += std::conj(w[p][i]) * w[q][i];
        }
        const double mag = std::abs(g);
        if (mag == 0.0 || mag <= kEps * std::sqrt(alpha * beta) || std::min(alpha, beta) <= negligible) continue;
        rotated = true;
        const cplx unphase = std::conj(g / mag);
        const double zeta = (beta - alpha) / (2.0 * mag);
        double t = 1.0 / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        if (zeta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const cplx xp = w[p][i];
          const cplx xq = w[q][i] * unphase;
          w[p][i] = c * xp - s * xq;
          w[q][i] = s * xp + c * xq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const cplx xp = v[p][i];
          const cplx xq = v[q][i] * unphase;
          v[p][i] = c * xp - s * xq;
          v[q][i] = s * xp + c * xq;
        }
      }
    }
    if (!rotated) break;
    if (sweep == kMaxSweeps) throw Error(ErrorCode::NoConvergence, "one-sided Jacobi did not converge");
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = norm2(w[j]);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

  SVD out;
  out.values.resize(n);
  for (std::size_t c = 0; c < n; ++c) out.values[c] = sigma[order[c]];
  out.U = CMatrix::generate(rows, n, [&](std::size_t i, std::size_t c) {
    const double s = sigma[order[c]];
    return s > 0.0 ? w[order[c]][i] / s : cplx(0.0);
  });
  out.V = CMatrix::generate(n, n, [&](std::size_t i, std::size_t c) { return v[order[c]][i]; });
  return out;
}

struct Nullity {
  std::size_t count = 0;
  CMatrix basis;  // cols x count, orthonormal columns spanning the kernel
};

/// Numerical kernel: singular values <= tol * sigma_max count as zero.
/// Singular values at or below tol * max(sigma_max, scale) count as zero;
/// `scale` supplies a reference size when m itself may vanish.
inline Nullity nullity(const CMatrix& m, double tol = 1e-9, double scale = 0.0) {
  const SVD d = svd(m);
  const double smax = std::max(d.values.empty() ? 0.0 : d.values.front(), scale);
  std::vector<std::size_t> null_cols;
  for (std::size_t j = 0; j < d.values.size(); ++j)
    if (d.values[j] <= tol * smax) null_cols.push_back(j);
  Nullity out;
  out.count = null_cols.size();
  out.basis = CMatrix::generate(m.cols(), null_cols.size(),
                                [&](std::size_t i, std::size_t c) { return d.V(i, null_cols[c]); });
  return out;
}

inline std::size_t numerical_rank(const CMatrix& m, double tol = 1e-9) {
  return m.cols() - nullity(m, tol).count;
}

/// sigma_max / sigma_min (infinity for singular input).
inline double condition_number(const CMatrix& m) {
  const SVD d = svd(m);
  if (d.values.empty()) return 1.0;
  const double smin = d.values.back();
  return smin == 0.0 ? std::numeric_limits<double>::infinity() : d.values.front() / smin;
}

// ---------------------------------------------------------------------------
// LU based determinant and inverse

namespace detail {

struct LU {
  std::vector<cplx> a;
  std::vector<std::size_t> perm;
  int sign = 1;
  bool singular = false;
};

inline LU lu_decompose(const CMatrix& m) {
  const std::size_t n = m.rows();
  LU lu;
  lu.a.assign(m.entries().begin(), m.entries().end());
  lu.perm.resize(n);
  std::iota(lu.perm.begin(), lu.perm.end(), 0);
  auto A = [&](std::size_t i, std::size_t j) -> cplx& { return lu.a[i * n + j]; };
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(A(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(A(i, k)) > best) {
        best = std::abs(A(i, k));
        piv = i;
      }
    }
    if (best == 0.0) {
      lu.singular = true;
      continue;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(A(k, j), A(piv, j));
      std::swap(lu.perm[k], lu.perm[piv]);
      lu.sign = -lu.sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const cplx f = A(i, k) / A(k, k);
      A(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) A(i, j) -= f * A(k, j);
    }
  }
  return lu;
}

}  // namespace detail

inline cplx determinant(const CMatrix& m) {
  if (!m.is_square()) throw Error(ErrorCode::DimensionMismatch, "determinant needs a square matrix");
  const std::size_t n = m.rows();
  if (n == 0) return 1.0;
  const detail::LU lu = detail::lu_decompose(m);
  if (lu.singular) return 0.0;
  cplx d = static_cast<double>(lu.sign);
  for (std::size_t i = 0; i < n; ++i) d *= lu.a[i * n + i];
  return d;
}

/// Inverse via partially pivoted LU. Refuses when sigma_min <= tol * sigma_max;
/// the Singular error carries the condition estimate.
inline CMatrix inverse(const CMatrix& m, double tol = 1e-12) {
  if (!m.is_square()) throw Error(ErrorCode::DimensionMismatch, "inverse needs a square matrix");
  const std::size_t n = m.rows();
  const SVD d = svd(m);
  const double smax = n == 0 ? 0.0 : d.values.front();
  const double smin = n == 0 ? 0.0 : d.values.back();
  if (n == 0 || smin <= tol * smax || smax == 0.0) {
    const double cond = smin == 0.0 ? std::numeric_limits<double>::infinity() : smax / smin;
    throw Error(ErrorCode::Singular, "condition estimate " + std::to_string(cond), cond);
  }
  const detail::LU lu = detail::lu_decompose(m);
  auto A = [&](std::size_t i, std::size_t j) { return lu.a[i * n + j]; };
  std::vector<cplx> inv(n * n);
  CVector x(n);
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t i = 0; i < n; ++i) {
      cplx s = lu.perm[i] == col ? 1.0 : 0.0;
      for (std::size_t j = 0; j < i; ++j) s -= A(i, j) * x[j];
      x[i] = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
      cplx s = x[ii];
      for (std::size_t j = ii + 1; j < n; ++j) s -= A(ii, j) * x[j];
      x[ii] = s / A(ii, ii);
    }
    for (std::size_t i = 0; i < n; ++i) inv[i * n + col] = x[i];
  }
  return CMatrix(n, n, std::move(inv));
}

// ---------------------------------------------------------------------------
// Polynomial roots via companion matrix eigenvalues

namespace detail {

// Diagonal similarity balancing (radix 2) of a dense matrix stored row-major.
inline void balance(std::vector<cplx>& a, std::size_t n) {
  constexpr double radix = 2.0;
  bool done = false;
  while (!done) {
    done = true;
    for (std::size_t i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a[j * n + i]);
        r += std::abs(a[i * n + j]);
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        for (std::size_t j = 0; j < n; ++j) a[i * n + j] /= f;
        for (std::size_t j = 0; j < n; ++j) a[j * n + i] *= f;
      }
    }
  }
}

// Eigenvalues of an upper Hessenberg matrix by shifted complex QR (Givens).
inline CVector hessenberg_eigenvalues(std::vector<cplx> a, std::size_t n) {
  auto H = [&](std::size_t i, std::size_t j) -> cplx& { return a[i * n + j]; };
  CVector eig(n);
  if (n == 0) return eig;
  std::size_t hi = n - 1;
  int iter = 0;
  int total = 0;
  const int budget = 100 * static_cast<int>(n);
  std::vector<cplx> cs(n), sn(n);
  while (true) {
    std::size_t l = hi;
    while (l > 0) {
      const double scale = std::abs(H(l - 1, l - 1)) + std::abs(H(l, l));
      if (std::abs(H(l, l - 1)) <= kEps * (scale == 0.0 ? 1.0 : scale)) {
        H(l, l - 1) = 0.0;
        break;
      }
      --l;
    }
    if (l == hi) {
      eig[hi] = H(hi, hi);
      if (hi == 0) break;
      --hi;
      iter = 0;
      continue;
    }
    if (++total > budget) throw Error(ErrorCode::NoConvergence, "Hessenberg QR iteration budget exhausted");
    ++iter;

    cplx shift;
    if (iter % 11 == 0) {
      shift = H(hi, hi) + 0.75 * std::abs(H(hi, hi - 1));
    } else {
      const cplx p = H(hi - 1, hi - 1), q = H(hi - 1, hi), r = H(hi, hi - 1), s = H(hi, hi);
      const cplx half_tr = 0.5 * (p + s);
      const cplx disc = std::sqrt(0.25 * (p - s) * (p - s) + q * r);
      const cplx l1 = half_tr + disc, l2 = half_tr - disc;
      shift = std::abs(l1 - s) < std::abs(l2 - s) ? l1 : l2;
    }

    for (std::size_t i = l; i <= hi; ++i) H(i, i) -= shift;
    for (std::size_t j = l; j < hi; ++j) {
      const cplx x = H(j, j), y = H(j + 1, j);
      const double r = std::hypot(std::abs(x), std::abs(y));
      const cplx c = r == 0.0 ? cplx(1.0) : x / r;
      const cplx s = r == 0.0 ? cplx(0.0) : y / r;
      cs[j] = c;
      sn[j] = s;
      for (std::size_t col = j; col <= hi; ++col) {
        const cplx u = H(j, col), w = H(j + 1, col);
        H(j, col) = std::conj(c) * u + std::conj(s) * w;
        H(j + 1, col) = -s * u + c * w;
      }
    }
    for (std::size_t j = l; j < hi; ++j) {
      const cplx c = cs[j], s = sn[j];
      const std::size_t last = std::min(j + 2, hi);
      for (std::size_t row = l; row <= last; ++row) {
        const cplx u = H(row, j), w = H(row, j + 1);
        H(row, j) = u * c + w * s;
        H(row, j + 1) = -u * std::conj(s) + w * std::conj(c);
      }
    }
    for (std::size_t i = l; i <= hi; ++i) H(i, i) += shift;
  }
  return eig;
}

inline std::pair<cplx, cplx> horner_with_derivative(std::span<const cplx> c, cplx x) {
  cplx p = 0.0, dp = 0.0;
  for (std::size_t j = c.size(); j-- > 0;) {
    dp = dp * x + p;
    p = p * x + c[j];
  }
  return {p, dp};
}

}  // namespace detail

/// Evaluates sum_j coeffs[j] x^j.
inline cplx poly_eval(std::span<const cplx> coeffs, cplx x) {
  return detail::horner_with_derivative(coeffs, x).first;
}

/// Roots of sum_{j<=d} coeffs[j] x^j (ascending coefficients, d = size - 1) as
/// eigenvalues of the balanced companion matrix, polished by Newton steps.
inline CVector poly_roots(std::span<const cplx> coeffs) {
  if (coeffs.empty()) throw Error(ErrorCode::DimensionMismatch, "empty coefficient list");
  const std::size_t d = coeffs.size() - 1;
  const double cmax = max_abs(coeffs);
  const cplx lead = coeffs[d];
  if (!(std::abs(lead) > 1e-12 * cmax)) {
    throw Error(ErrorCode::DegenerateLeadingCoefficient,
                "|leading| / max|c| = " + std::to_string(cmax == 0.0 ? 0.0 : std::abs(lead) / cmax),
                std::abs(lead));
  }
  if (d == 0) return {};

  std::vector<cplx> comp(d * d);
  for (std::size_t j = 0; j < d; ++j) comp[j] = -coeffs[d - 1 - j] / lead;
  for (std::size_t i = 1; i < d; ++i) comp[i * d + (i - 1)] = 1.0;
  detail::balance(comp, d);
  CVector roots = detail::hessenberg_eigenvalues(std::move(comp), d);

  for (auto& x : roots) {
    for (int it = 0; it < 4; ++it) {
      const auto [p, dp] = detail::horner_with_derivative(coeffs, x);
      if (p == 0.0 || dp == 0.0) break;
      const cplx candidate = x - p / dp;
      if (std::abs(poly_eval(coeffs, candidate)) < std::abs(p)) {
        x = candidate;
      } else {
        break;
      }
    }
  }
  return roots;
}

}  // namespace dnahm
