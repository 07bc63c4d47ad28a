#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "acdisc/linalg.hpp"
#include "acdisc/poly.hpp"

namespace acdisc {

inline Mat j_standard(int n) {
  Mat j(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    j(i, n + i) = -1.0;
    j(n + i, i) = 1.0;
  }
  return j;
}

// Sampling domain: ball or axis box in R^{2n}. `resolution` is the per-axis
// sample count of the scan grid (0 picks a dimension-dependent default).
struct DomainSpec {
  enum class Shape { Ball, Box };

  Shape shape = Shape::Ball;
  Vec center;
  double radius = 1.0;
  Vec lo, hi;
  int resolution = 0;

  static DomainSpec ball(int dim, double r = 1.0, Vec c = {}, int res = 0) {
    DomainSpec d;
    d.shape = Shape::Ball;
    d.center = c.empty() ? Vec(dim, 0.0) : c;
    d.radius = r;
    d.resolution = res;
    d.validate();
    return d;
  }
  static DomainSpec box(Vec lo, Vec hi, int res = 0) {
    DomainSpec d;
    d.shape = Shape::Box;
    d.lo = std::move(lo);
    d.hi = std::move(hi);
    d.resolution = res;
    d.validate();
    return d;
  }

  int dim() const { return shape == Shape::Ball ? static_cast<int>(center.size()) : static_cast<int>(lo.size()); }

  void validate() const {
    if (shape == Shape::Ball) {
      require(radius > 0.0, ErrorKind::NonPositive, "ball radius must be positive");
      require(!center.empty(), ErrorKind::BadInput, "ball center missing");
    } else {
      require(!lo.empty() && lo.size() == hi.size(), ErrorKind::BadInput, "box corners mismatch");
      for (std::size_t i = 0; i < lo.size(); ++i)
        require(hi[i] > lo[i], ErrorKind::NonPositive, "box must have positive extent");
    }
    require(resolution == 0 || resolution >= 2, ErrorKind::BadInput, "resolution must be >= 2");
  }

  // m such that ||x|| <= m on the closure.
  double bound() const {
    if (shape == Shape::Ball) return norm2(center) + radius;
    double m2 = 0;
    int d = dim();
    for (int mask = 0; mask < (1 << d); ++mask) {
      double s = 0;
      for (int i = 0; i < d; ++i) {
        double c = (mask >> i) & 1 ? hi[i] : lo[i];
        s += c * c;
      }
      m2 = std::max(m2, s);
    }
    return std::sqrt(m2);
  }

  int effective_resolution() const {
    if (resolution >= 2) return resolution;
    switch (dim()) {
      case 2: return 33;
      case 4: return 9;
      default: return 5;
    }
  }

  bool contains(const Vec& x) const {
    if (shape == Shape::Ball) return norm2(x - center) <= radius + 1e-12;
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (x[i] < lo[i] - 1e-12 || x[i] > hi[i] + 1e-12) return false;
    return true;
  }

  Vec project(const Vec& x) const {
    if (shape == Shape::Ball) {
      Vec d = x - center;
      double r = norm2(d);
      if (r <= radius) return x;
      return center + (radius / r) * d;
    }
    Vec y = x;
    for (std::size_t i = 0; i < lo.size(); ++i) y[i] = std::clamp(y[i], lo[i], hi[i]);
    return y;
  }

  std::vector<Vec> samples() const {
    int d = dim();
    int res = effective_resolution();
    Vec axis_lo(d), axis_hi(d);
    if (shape == Shape::Ball) {
      for (int i = 0; i < d; ++i) {
        axis_lo[i] = center[i] - radius;
        axis_hi[i] = center[i] + radius;
      }
    } else {
      axis_lo = lo;
      axis_hi = hi;
    }
    std::vector<Vec> out;
    Vec x(d);
    std::vector<int> idx(d, 0);
    for (;;) {
      for (int i = 0; i < d; ++i)
        x[i] = axis_lo[i] + (axis_hi[i] - axis_lo[i]) * idx[i] / double(res - 1);
      if (contains(x)) out.push_back(x);
      int k = 0;
      while (k < d && ++idx[k] == res) idx[k++] = 0;
      if (k == d) break;
    }
    return out;
  }
};

// Complex polynomial matrix: H[i][j] = re + i*im, entries polynomial in the
// 2n real coordinates.
struct PolyCMat {
  int n = 0;
  std::vector<Poly> re, im;  // n*n each, row-major

  const Poly& pre(int i, int j) const { return re[static_cast<std::size_t>(i) * n + j]; }
  const Poly& pim(int i, int j) const { return im[static_cast<std::size_t>(i) * n + j]; }

  void eval(const Vec& p, Mat& R, Mat& S) const {
    R = Mat(n, n);
    S = Mat(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        R(i, j) = pre(i, j).eval(p);
        S(i, j) = pim(i, j).eval(p);
      }
  }
  void eval_derivative(const Vec& p, int k, Mat& dR, Mat& dS) const {
    dR = Mat(n, n);
    dS = Mat(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        dR(i, j) = pre(i, j).derivative(k).eval(p);
        dS(i, j) = pim(i, j).derivative(k).eval(p);
      }
  }
  std::vector<std::complex<double>> eval_complex(const Vec& p) const {
    std::vector<std::complex<double>> out(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out[static_cast<std::size_t>(i) * n + j] = {pre(i, j).eval(p), pim(i, j).eval(p)};
    return out;
  }
};

// Almost complex structure as a matrix field on R^{2n}. Value semantics;
// derivative access is exact for the symbolic representations and falls back
// to central differences for opaque callables.
class StructureField {
 public:
  int n = 0;
  double regularity = 2.5;
  std::string repr = "callable";

  std::function<Mat(const Vec&)> value_fn;
  std::function<Mat(const Vec&, int)> deriv_fn;  // d J / d x_k
  double fd_step = 1e-5;
  bool allow_fd = true;

  int dim() const { return 2 * n; }

  Mat value(const Vec& p) const { return value_fn(p); }

  bool has_derivatives() const { return static_cast<bool>(deriv_fn) || allow_fd; }

  Mat derivative(const Vec& p, int k) const {
    if (deriv_fn) return deriv_fn(p, k);
    require(allow_fd, ErrorKind::NoDerivatives, "structure has values only");
    Vec a = p, b = p;
    a[k] += fd_step;
    b[k] -= fd_step;
    return (value_fn(a) - value_fn(b)) * (1.0 / (2.0 * fd_step));
  }
};

inline StructureField structure_constant(int n, Mat j) {
  require(j.rows() == 2 * n && j.cols() == 2 * n, ErrorKind::BadInput, "constant structure must be 2n x 2n");
  StructureField f;
  f.n = n;
  f.repr = "constant";
  f.value_fn = [j](const Vec&) { return j; };
  f.deriv_fn = [n](const Vec&, int) { return Mat::zero(2 * n, 2 * n); };
  return f;
}

inline StructureField structure_standard(int n) { return structure_constant(n, j_standard(n)); }

inline StructureField structure_from_poly(int n, std::vector<Poly> entries) {
  require(static_cast<int>(entries.size()) == 4 * n * n, ErrorKind::BadInput,
          "polynomial structure needs (2n)^2 entries");
  auto shared = std::make_shared<std::vector<Poly>>(std::move(entries));
  StructureField f;
  f.n = n;
  f.repr = "poly";
  int d = 2 * n;
  f.value_fn = [shared, d](const Vec& p) {
    Mat m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = (*shared)[static_cast<std::size_t>(i) * d + j].eval(p);
    return m;
  };
  f.deriv_fn = [shared, d](const Vec& p, int k) {
    Mat m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        m(i, j) = (*shared)[static_cast<std::size_t>(i) * d + j].derivative(k).eval(p);
    return m;
  };
  return f;
}

namespace detail {
// Blocks of the H-parametrized structure at a point; shared by value and
// derivative paths. C = (S+I)^{-1}, A = -R C, B = -(I+A^2) C^{-1}, D = -C A C^{-1}.
struct HBlocks {
  Mat R, S, T, C, A, B, D;  // T = S + I = C^{-1}
};

inline HBlocks h_blocks(const PolyCMat& H, const Vec& p, bool enforce_cap) {
  HBlocks b;
  H.eval(p, b.R, b.S);
  int n = H.n;
  if (enforce_cap) {
    std::vector<std::complex<double>> h(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) h[static_cast<std::size_t>(i) * n + j] = {b.R(i, j), b.S(i, j)};
    double h0 = op_norm_complex(n, h);
    require(h0 <= 0.25, ErrorKind::TooLarge, "||H(p)||_0 exceeds 1/4");
  }
  b.T = b.S + Mat::identity(n);
  b.C = inverse(b.T, ErrorKind::SingularBlock);
  b.A = (b.R * b.C) * -1.0;
  Mat I = Mat::identity(n);
  b.B = ((I + b.A * b.A) * b.T) * -1.0;
  b.D = ((b.C * b.A) * b.T) * -1.0;
  return b;
}

inline Mat assemble_blocks(const Mat& A, const Mat& B, const Mat& C, const Mat& D) {
  int n = A.rows();
  Mat J(2 * n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      J(i, j) = A(i, j);
      J(i, j + n) = B(i, j);
      J(i + n, j) = C(i, j);
      J(i + n, j + n) = D(i, j);
    }
  return J;
}
}  // namespace detail

// Structure determined by the deformation tensor H = R + iS: the forms
// dz + H dy span the (1,0) covectors. Derivatives are exact via matrix
// calculus on the exact polynomial derivatives of R and S.
inline StructureField structure_from_H(int n, PolyCMat H) {
  require(H.n == n, ErrorKind::BadInput, "H dimension mismatch");
  auto shared = std::make_shared<PolyCMat>(std::move(H));
  StructureField f;
  f.n = n;
  f.repr = "from_H";
  f.value_fn = [shared](const Vec& p) {
    auto b = detail::h_blocks(*shared, p, true);
    return detail::assemble_blocks(b.A, b.B, b.C, b.D);
  };
  f.deriv_fn = [shared, n](const Vec& p, int k) {
    auto b = detail::h_blocks(*shared, p, false);
    Mat dR, dS;
    shared->eval_derivative(p, k, dR, dS);
    // dC = -C dS C; dA = -(dR C + R dC); B = -(I+A^2) T with dT = dS;
    // D = -C A T.
    Mat dC = (b.C * dS * b.C) * -1.0;
    Mat dA = (dR * b.C + b.R * dC) * -1.0;
    Mat I = Mat::identity(n);
    Mat dB = ((dA * b.A + b.A * dA) * b.T + (I + b.A * b.A) * dS) * -1.0;
    Mat dD = ((dC * b.A + b.C * dA) * b.T + (b.C * b.A) * dS) * -1.0;
    return detail::assemble_blocks(dA, dB, dC, dD);
  };
  return f;
}

// Pushforward by the linear change x -> P^{-1} x: J becomes P^{-1} J(P x) P.
inline StructureField pushforward_linear(const StructureField& J, const Mat& P) {
  require(P.rows() == J.dim() && P.cols() == J.dim(), ErrorKind::BadInput, "frame matrix dimension mismatch");
  Mat Pinv = inverse(P);
  auto base = std::make_shared<StructureField>(J);
  StructureField f;
  f.n = J.n;
  f.repr = "pushforward";
  f.regularity = J.regularity;
  f.value_fn = [base, P, Pinv](const Vec& x) { return Pinv * base->value(P * x) * P; };
  if (base->has_derivatives()) {
    int d = J.dim();
    f.deriv_fn = [base, P, Pinv, d](const Vec& x, int k) {
      Vec px = P * x;
      Mat acc = Mat::zero(d, d);
      for (int l = 0; l < d; ++l) {
        double plk = P(l, k);
        if (plk == 0.0) continue;
        acc = acc + base->derivative(px, l) * plk;
      }
      return Pinv * acc * P;
    };
  }
  return f;
}

struct ValidationReport {
  double residual = 0;   // sup over samples of ||J(p)^2 + I||_0
  Vec worst_point;
  bool ok = false;
};

inline ValidationReport validate_structure(const StructureField& J, const DomainSpec& D,
                                           double tol = 1e-8) {
  require(D.dim() == J.dim(), ErrorKind::BadInput, "domain dimension mismatch");
  ValidationReport rep;
  Mat I = Mat::identity(J.dim());
  for (const auto& p : D.samples()) {
    Mat r = J.value(p) * J.value(p) + I;
    double e = op_norm(r);
    if (e > rep.residual) {
      rep.residual = e;
      rep.worst_point = p;
    }
  }
  rep.ok = rep.residual <= tol;
  return rep;
}

struct NormReport {
  double norm0 = 0;    // sup_p ||J_p||_0
  double norm1 = 0;    // sup_p ||J_p||_1
  double c1_norm = 0;  // == norm1 by construction
  Vec worst_point;
};

// ||J_p||_1 = ||J_p||_0 + sqrt( sum_i || (dJ_{i,j}/dx_k)_{j,k} ||_0^2 ).
inline double structure_norm1_at(const StructureField& J, const Vec& p) {
  int d = J.dim();
  double v0 = op_norm(J.value(p));
  std::vector<Mat> dJ(d);
  for (int k = 0; k < d; ++k) dJ[k] = J.derivative(p, k);
  double sum = 0;
  for (int i = 0; i < d; ++i) {
    Mat rowmat(d, d);  // entry (j,k): dJ[i][j]/dx_k
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) rowmat(j, k) = dJ[k](i, j);
    double nm = op_norm(rowmat);
    sum += nm * nm;
  }
  return v0 + std::sqrt(sum);
}

inline NormReport structure_norms(const StructureField& J, const DomainSpec& D) {
  require(D.dim() == J.dim(), ErrorKind::BadInput, "domain dimension mismatch");
  NormReport rep;
  for (const auto& p : D.samples()) {
    double v0 = op_norm(J.value(p));
    double v1 = structure_norm1_at(J, p);
    rep.norm0 = std::max(rep.norm0, v0);
    if (v1 > rep.norm1) {
      rep.norm1 = v1;
      rep.worst_point = p;
    }
  }
  rep.c1_norm = rep.norm1;
  return rep;
}

// sup_p [ ||J(p)-J_st||_0 + sqrt(sum_i ||rows of dJ||_0^2) ]: the C^1 distance
// used by every epsilon_m hypothesis.
inline double c1_distance_to_standard(const StructureField& J, const DomainSpec& D) {
  Mat jst = j_standard(J.n);
  int d = J.dim();
  double sup = 0;
  auto pts = D.samples();
  std::vector<double> vals(pts.size());
  parallel_for(pts.size(), [&](std::size_t idx) {
    const Vec& p = pts[idx];
    double v0 = op_norm(J.value(p) - jst);
    std::vector<Mat> dJ(d);
    for (int k = 0; k < d; ++k) dJ[k] = J.derivative(p, k);
    double sum = 0;
    for (int i = 0; i < d; ++i) {
      Mat rowmat(d, d);
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) rowmat(j, k) = dJ[k](i, j);
      double nm = op_norm(rowmat);
      sum += nm * nm;
    }
    vals[idx] = v0 + std::sqrt(sum);
  });
  for (double v : vals) sup = std::max(sup, v);
  return sup;
}

struct BlockForm {
  Mat A, B, C, D;
  Mat reconstructed;        // from (A, C) via the square-root-free completion
  double reconstruction_error = 0;
};

inline BlockForm block_form(const StructureField& J, const Vec& p) {
  int n = J.n;
  Mat j = J.value(p);
  BlockForm bf;
  bf.A = Mat(n, n);
  bf.B = Mat(n, n);
  bf.C = Mat(n, n);
  bf.D = Mat(n, n);
  for (int i = 0; i < n; ++i)
    for (int jj = 0; jj < n; ++jj) {
      bf.A(i, jj) = j(i, jj);
      bf.B(i, jj) = j(i, jj + n);
      bf.C(i, jj) = j(i + n, jj);
      bf.D(i, jj) = j(i + n, jj + n);
    }
  Mat Cinv = inverse(bf.C, ErrorKind::SingularBlock);
  Mat I = Mat::identity(n);
  Mat Bhat = ((I + bf.A * bf.A) * Cinv) * -1.0;
  Mat Dhat = ((bf.C * bf.A) * Cinv) * -1.0;
  bf.reconstructed = detail::assemble_blocks(bf.A, Bhat, bf.C, Dhat);
  bf.reconstruction_error = op_norm(bf.reconstructed - j);
  return bf;
}

// Recover H = R + iS from the block form: S = C^{-1} - I, R = -A C^{-1}.
inline std::vector<std::complex<double>> extract_H(const StructureField& J, const Vec& p) {
  BlockForm bf = block_form(J, p);
  int n = J.n;
  Mat Cinv = inverse(bf.C, ErrorKind::SingularBlock);
  Mat S = Cinv - Mat::identity(n);
  Mat R = (bf.A * Cinv) * -1.0;
  std::vector<std::complex<double>> H(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) H[static_cast<std::size_t>(i) * n + j] = {R(i, j), S(i, j)};
  return H;
}

// Residual of the (1,0)-form pairing: the rows dz_i + H_i. dy must annihilate
// the (0,1) fields (1/2)(I + iJ) d/dx_j, j = 1..n.
inline double form_annihilation_residual(const StructureField& J,
                                         const std::vector<std::complex<double>>& H, const Vec& p) {
  int n = J.n;
  Mat j = J.value(p);
  double worst = 0;
  for (int col = 0; col < n; ++col) {
    // field V = (1/2)(I + iJ) e_col, complex components over 2n coordinates
    std::vector<std::complex<double>> V(2 * n);
    for (int r = 0; r < 2 * n; ++r) {
      double re = (r == col) ? 0.5 : 0.0;
      V[r] = std::complex<double>(re, 0.5 * j(r, col));
    }
    for (int i = 0; i < n; ++i) {
      // omega_i = dx_i + i dy_i + sum_j H_ij dy_j
      std::complex<double> s = V[i] + std::complex<double>(0, 1) * V[n + i];
      for (int jj = 0; jj < n; ++jj) s += H[static_cast<std::size_t>(i) * n + jj] * V[n + jj];
      worst = std::max(worst, std::abs(s));
    }
  }
  return worst;
}

}  // namespace acdisc
