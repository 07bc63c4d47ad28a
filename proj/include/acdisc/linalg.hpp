#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <vector>

#include "acdisc/common.hpp"

namespace acdisc {

using Vec = std::vector<double>;
using CVec = std::vector<std::complex<double>>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec operator-(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}
inline Vec operator+(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}
inline CVec operator+(const CVec& a, const CVec& b) {
  CVec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}
inline CVec operator-(const CVec& a, const CVec& b) {
  CVec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}
inline Vec operator*(double s, const Vec& a) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

// Dense row-major matrix. Dimensions here are tiny (2n or 4n with n <= 3), so
// everything is plain O(n^3) with no blocking.
class Mat {
 public:
  Mat() : rows_(0), cols_(0) {}
  Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, 0.0) {}

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static Mat zero(int r, int c) { return Mat(r, c); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

  Mat transpose() const {
    Mat t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Mat operator*(const Mat& b) const {
    Mat r(rows_, b.cols_);
    for (int i = 0; i < rows_; ++i)
      for (int k = 0; k < cols_; ++k) {
        double aik = (*this)(i, k);
        if (aik == 0.0) continue;
        for (int j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
      }
    return r;
  }
  Vec operator*(const Vec& x) const {
    Vec r(rows_, 0.0);
    for (int i = 0; i < rows_; ++i) {
      double s = 0;
      for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
      r[i] = s;
    }
    return r;
  }
  Mat operator+(const Mat& b) const {
    Mat r = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] += b.a_[i];
    return r;
  }
  Mat operator-(const Mat& b) const {
    Mat r = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] -= b.a_[i];
    return r;
  }
  Mat operator*(double s) const {
    Mat r = *this;
    for (auto& v : r.a_) v *= s;
    return r;
  }

  double max_abs() const {
    double m = 0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  int rows_, cols_;
  std::vector<double> a_;
};

inline Mat operator*(double s, const Mat& m) { return m * s; }

// Gauss-Jordan with partial pivoting; fine at these sizes.
inline Mat inverse(const Mat& m, ErrorKind on_singular = ErrorKind::SingularMatrix) {
  const int n = m.rows();
  require(n == m.cols(), ErrorKind::BadInput, "inverse of non-square matrix");
  Mat a = m;
  Mat inv = Mat::identity(n);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (std::abs(a(piv, col)) < 1e-14) fail(on_singular, "matrix numerically singular");
    if (piv != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(a(piv, j), a(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    }
    double d = a(col, col);
    for (int j = 0; j < n; ++j) {
      a(col, j) /= d;
      inv(col, j) /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = a(r, col);
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

struct SymEigen {
  Vec values;             // ascending
  Mat vectors;            // columns match values
};

// Cyclic Jacobi on a symmetric matrix. Dimension is tiny; exactness over speed.
inline SymEigen sym_eigen(const Mat& m) {
  const int n = m.rows();
  Mat a = m;
  Mat v = Mat::identity(n);
  // symmetrize defensively; callers pass symmetric input
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double s = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = a(j, i) = s;
    }
  double scale = a.max_abs();
  if (scale == 0.0) scale = 1.0;
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off = std::max(off, std::abs(a(i, j)));
    if (off < 1e-15 * scale) break;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::abs(apq) < 1e-18 * scale) continue;
        double theta = 0.5 * (a(q, q) - a(p, p)) / apq;
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }
  SymEigen out;
  out.values.resize(n);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) {
    out.values[i] = a(i, i);
    order[i] = i;
  }
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) < a(y, y); });
  SymEigen sorted;
  sorted.values.resize(n);
  sorted.vectors = Mat(n, n);
  for (int c = 0; c < n; ++c) {
    sorted.values[c] = a(order[c], order[c]);
    for (int r = 0; r < n; ++r) sorted.vectors(r, c) = v(r, order[c]);
  }
  return sorted;
}

inline double min_eigenvalue(const Mat& sym) { return sym_eigen(sym).values.front(); }
inline double max_eigenvalue(const Mat& sym) { return sym_eigen(sym).values.back(); }

// Largest singular value via Jacobi on the Gram matrix.
inline double op_norm(const Mat& m) {
  Mat g = m.transpose() * m;
  double l = max_eigenvalue(g);
  return std::sqrt(std::max(0.0, l));
}

inline double min_singular_value(const Mat& m) {
  Mat g = m.transpose() * m;
  double l = min_eigenvalue(g);
  return std::sqrt(std::max(0.0, l));
}

// Operator norm of a complex matrix through its real 2n x 2n representation
// [[Re, -Im], [Im, Re]].
inline Mat real_embedding(int n, const std::vector<std::complex<double>>& entries) {
  Mat m(2 * n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto& z = entries[static_cast<std::size_t>(i) * n + j];
      m(i, j) = z.real();
      m(i, j + n) = -z.imag();
      m(i + n, j) = z.imag();
      m(i + n, j + n) = z.real();
    }
  return m;
}

inline double op_norm_complex(int n, const std::vector<std::complex<double>>& entries) {
  return op_norm(real_embedding(n, entries));
}

// Dense square complex matrix, row-major, same tiny-size regime as Mat.
class CMat {
 public:
  CMat() : n_(0) {}
  explicit CMat(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, std::complex<double>(0, 0)) {}

  static CMat identity(int n) {
    CMat m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int n() const { return n_; }
  std::complex<double>& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  std::complex<double> operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  const std::vector<std::complex<double>>& entries() const { return a_; }

  CMat operator*(const CMat& b) const {
    CMat r(n_);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k) {
        auto aik = (*this)(i, k);
        for (int j = 0; j < n_; ++j) r(i, j) += aik * b(k, j);
      }
    return r;
  }
  CVec operator*(const CVec& x) const {
    CVec r(n_, std::complex<double>(0, 0));
    for (int i = 0; i < n_; ++i) {
      std::complex<double> s = 0;
      for (int j = 0; j < n_; ++j) s += (*this)(i, j) * x[j];
      r[i] = s;
    }
    return r;
  }
  CMat operator+(const CMat& b) const {
    CMat r = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] += b.a_[i];
    return r;
  }
  CMat operator-(const CMat& b) const {
    CMat r = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] -= b.a_[i];
    return r;
  }
  CMat operator*(std::complex<double> s) const {
    CMat r = *this;
    for (auto& v : r.a_) v *= s;
    return r;
  }
  CMat conj() const {
    CMat r = *this;
    for (auto& v : r.a_) v = std::conj(v);
    return r;
  }
  double max_abs() const {
    double m = 0;
    for (const auto& v : a_) m = std::max(m, std::abs(v));
    return m;
  }
  double op_norm() const { return op_norm_complex(n_, a_); }

 private:
  int n_;
  std::vector<std::complex<double>> a_;
};

inline CMat inverse(const CMat& m, ErrorKind on_singular = ErrorKind::SingularMatrix) {
  const int n = m.n();
  CMat a = m;
  CMat inv = CMat::identity(n);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (std::abs(a(piv, col)) < 1e-14)
      fail(on_singular, "complex matrix numerically singular");
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        std::swap(a(col, j), a(piv, j));
        std::swap(inv(col, j), inv(piv, j));
      }
    std::complex<double> d = a(col, col);
    for (int j = 0; j < n; ++j) {
      a(col, j) /= d;
      inv(col, j) /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      std::complex<double> f = a(r, col);
      if (f == std::complex<double>(0, 0)) continue;
      for (int j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

}  // namespace acdisc
