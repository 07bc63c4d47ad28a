#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "acdisc/structure.hpp"

namespace acdisc {

// Columns (e_1..e_n, J_p e_1..J_p e_n). Whenever invertible, conjugating by
// this matrix sends J(p) to J_st exactly.
inline Mat frame_matrix(const StructureField& J, const Vec& p) {
  int n = J.n;
  Mat jp = J.value(p);
  Mat P(2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i)
    for (int j = 0; j < n; ++j) {
      P(i, j) = (i == j) ? 1.0 : 0.0;
      P(i, j + n) = jp(i, j);
    }
  return P;
}

// Spec name for the linear change of coordinates x -> P^{-1} x.
inline StructureField pushforward(const StructureField& J, const Mat& P) {
  return pushforward_linear(J, P);
}

namespace detail {
struct PhiBlocks {
  Mat A, C, Cinv, G;  // G = A C^{-1}
};

inline PhiBlocks phi_blocks(const StructureField& J, const Vec& q) {
  int n = J.n;
  Mat j = J.value(q);
  PhiBlocks b;
  b.A = Mat(n, n);
  b.C = Mat(n, n);
  for (int i = 0; i < n; ++i)
    for (int jj = 0; jj < n; ++jj) {
      b.A(i, jj) = j(i, jj);
      b.C(i, jj) = j(i + n, jj);
    }
  b.Cinv = inverse(b.C, ErrorKind::SingularBlock);
  b.G = b.A * b.Cinv;
  return b;
}

// phi(x, y) = (x - A C^{-1} y, C^{-1} y) with blocks taken at (x, y).
inline Vec phi_apply(const StructureField& J, const Vec& q) {
  int n = J.n;
  auto b = phi_blocks(J, q);
  Vec y(n);
  for (int i = 0; i < n; ++i) y[i] = q[n + i];
  Vec gy = b.G * y;
  Vec cy = b.Cinv * y;
  Vec out(2 * n);
  for (int i = 0; i < n; ++i) {
    out[i] = q[i] - gy[i];
    out[n + i] = cy[i];
  }
  return out;
}

// Solves phi(q) = w by the fixed point x = x* + A(q) y*, y = C(q) y*.
inline Vec phi_invert(const StructureField& J, const Vec& w, int max_iter = 200,
                      double tol = 1e-13) {
  int n = J.n;
  Vec xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = w[i];
    ys[i] = w[n + i];
  }
  Vec q = w;  // blocks near (0, I): w itself is a good seed
  for (int it = 0; it < max_iter; ++it) {
    auto b = phi_blocks(J, q);
    Vec ay = b.A * ys;
    Vec cy = b.C * ys;
    Vec next(2 * n);
    double delta = 0;
    for (int i = 0; i < n; ++i) {
      next[i] = xs[i] + ay[i];
      next[n + i] = cy[i];
      delta = std::max(delta, std::abs(next[i] - q[i]));
      delta = std::max(delta, std::abs(next[n + i] - q[n + i]));
    }
    q = next;
    if (delta <= tol * (1.0 + norm2(w))) return q;
  }
  fail(ErrorKind::PreconditionFailed, "normalization inverse did not converge");
}

// d phi at q, via exact block derivatives of J.
inline Mat phi_derivative(const StructureField& J, const Vec& q) {
  int n = J.n;
  auto b = phi_blocks(J, q);
  Vec y(n);
  for (int i = 0; i < n; ++i) y[i] = q[n + i];

  Mat d(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      d(i, j) = (i == j) ? 1.0 : 0.0;
      d(i, j + n) = -b.G(i, j);
      d(i + n, j) = 0.0;
      d(i + n, j + n) = b.Cinv(i, j);
    }
  }
  for (int k = 0; k < 2 * n; ++k) {
    Mat dJ = J.derivative(q, k);
    Mat dA(n, n), dC(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        dA(i, j) = dJ(i, j);
        dC(i, j) = dJ(i + n, j);
      }
    Mat dCinv = (b.Cinv * dC * b.Cinv) * -1.0;
    Mat dG = dA * b.Cinv + b.A * dCinv;
    Vec dGy = dG * y;
    Vec dCy = dCinv * y;
    for (int i = 0; i < n; ++i) {
      d(i, k) += -dGy[i];
      d(i + n, k) += dCy[i];
    }
  }
  return d;
}
}  // namespace detail

// Pushforward of J under its own normalization phi. Values are exact matrix
// sandwiches (the inverse map is resolved per point); derivatives fall back
// to finite differences since they would need second derivatives of J.
inline StructureField structure_normalize(const StructureField& J) {
  auto base = std::make_shared<StructureField>(J);
  StructureField f;
  f.n = J.n;
  f.repr = "normalized";
  f.regularity = J.regularity;
  f.value_fn = [base](const Vec& w) {
    Vec q = detail::phi_invert(*base, w);
    Mat d = detail::phi_derivative(*base, q);
    return d * base->value(q) * inverse(d);
  };
  f.allow_fd = true;
  return f;
}

// J(t .) with the chain-rule factor on derivatives.
inline StructureField structure_dilate(const StructureField& J, double t) {
  require(t > 0.0, ErrorKind::NonPositive, "dilation factor must be positive");
  auto base = std::make_shared<StructureField>(J);
  StructureField f;
  f.n = J.n;
  f.repr = J.repr + "-dilated";
  f.regularity = J.regularity;
  f.value_fn = [base, t](const Vec& w) { return base->value(t * w); };
  f.deriv_fn = [base, t](const Vec& w, int k) { return base->derivative(t * w, k) * t; };
  return f;
}

struct TamedChartOptions {
  int check_resolution = 0;        // sampling resolution for the taming scans
  double t_floor = 1.0 / 1048576;  // 2^{-20}
  double slice_cut = 1e-9;         // |y*| below this is treated as on-slice
};

// Chart z = d_t o phi o P_p^{-1} o (translate by -p). The pushforward
// structure lives on the closed unit ball, agrees with J_st on {y* = 0},
// and stays within c * epsilon * ||y*|| of it elsewhere (c measured).
struct TamedChart {
  int n = 0;
  Vec p;
  double epsilon = 0;
  double t = 1.0;
  Mat P, P_inv;                 // frame factor
  double measured_c = 0;        // sup ||z_*J - J_st|| / (epsilon ||y*||)
  double measured_c1 = 0;       // C^1 distance of z_*J to J_st on the ball
  Vec worst_sample;             // where the ratio sup is attained
  StructureField normalized;    // phi_* (frame-adjusted J), before dilation
  StructureField pushforward;   // z_*J on the unit ball
  std::function<Vec(const Vec&)> forward;
  std::function<Vec(const Vec&)> inverse;

  Vec push_tangent(const Vec& p_base, const Vec& v) const {
    // d z = (1/t) d phi d(P^{-1} (x - p))
    Vec q = P_inv * (p_base - p);
    Mat dphi = detail::phi_derivative(frame_adjusted(), q);
    return (1.0 / t) * (dphi * (P_inv * v));
  }

  const StructureField& frame_adjusted() const { return *frame_adjusted_; }
  std::shared_ptr<StructureField> frame_adjusted_;  // P-conjugated, translated
};

inline TamedChart build_tamed_chart(const StructureField& J, const Vec& p, double epsilon,
                                    TamedChartOptions opt = {}) {
  require(epsilon > 0.0, ErrorKind::NonPositive, "taming tolerance must be positive");
  int n = J.n;
  require(static_cast<int>(p.size()) == 2 * n, ErrorKind::BadInput, "base point dimension mismatch");
  for (int i = 0; i < n; ++i)
    require(std::abs(p[n + i]) <= 1e-12, ErrorKind::PreconditionFailed,
            "base point must lie on the flattened slice {y = 0}");

  TamedChart chart;
  chart.n = n;
  chart.p = p;
  chart.epsilon = epsilon;
  chart.P = frame_matrix(J, p);
  require(min_singular_value(chart.P) > 1e-10, ErrorKind::SingularMatrix,
          "frame matrix is numerically singular");
  chart.P_inv = inverse(chart.P);

  // Frame change must also keep the slice flat: P maps {y=0} to itself only
  // when the J(p) upper-left block vanishes on it, which the frame columns
  // guarantee by construction (first n columns are e_j).
  auto base = std::make_shared<StructureField>(J);
  Mat P = chart.P, Pinv = chart.P_inv;
  StructureField translated;
  translated.n = n;
  translated.repr = "translated";
  translated.regularity = J.regularity;
  translated.value_fn = [base, p](const Vec& x) { return base->value(x + p); };
  if (J.deriv_fn)
    translated.deriv_fn = [base, p](const Vec& x, int k) { return base->derivative(x + p, k); };
  StructureField framed = pushforward_linear(translated, P);
  chart.frame_adjusted_ = std::make_shared<StructureField>(framed);
  chart.normalized = structure_normalize(framed);

  // Largest dyadic t whose dilated pushforward stays epsilon-close to J_st
  // in C^1 over the closed unit ball.
  DomainSpec ball = DomainSpec::ball(2 * n, 1.0, Vec(2 * n, 0.0), opt.check_resolution);
  double t = 1.0;
  bool found = false;
  while (t >= opt.t_floor) {
    StructureField candidate = structure_dilate(chart.normalized, t);
    double dist = c1_distance_to_standard(candidate, ball);
    if (dist <= epsilon) {
      chart.t = t;
      chart.measured_c1 = dist;
      chart.pushforward = candidate;
      found = true;
      break;
    }
    t *= 0.5;
  }
  if (!found) fail(ErrorKind::CannotTame, "no dilation achieves the requested C^1 tolerance");

  auto framed_ptr = chart.frame_adjusted_;
  double tt = chart.t;
  chart.forward = [framed_ptr, Pinv, p, tt](const Vec& x) {
    Vec w = detail::phi_apply(*framed_ptr, Pinv * (x - p));
    return (1.0 / tt) * w;
  };
  chart.inverse = [framed_ptr, P, p, tt](const Vec& w) {
    Vec q = detail::phi_invert(*framed_ptr, tt * w);
    return p + P * q;
  };

  // Measured taming constant over ball samples off the slice.
  Mat jst = j_standard(n);
  auto pts = ball.samples();
  std::vector<double> ratios(pts.size(), 0.0);
  parallel_for(pts.size(), [&](std::size_t i) {
    const Vec& w = pts[i];
    double ystar = 0;
    for (int c = 0; c < n; ++c) ystar += w[n + c] * w[n + c];
    ystar = std::sqrt(ystar);
    if (ystar <= opt.slice_cut) return;
    double dev = op_norm(chart.pushforward.value(w) - jst);
    ratios[i] = dev / (epsilon * ystar);
  });
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (ratios[i] > chart.measured_c) {
      chart.measured_c = ratios[i];
      chart.worst_sample = pts[i];
    }
  return chart;
}

// Real-block coefficient pair of the holomorphy system at a point:
// Mzbar * dh/dzbar + Mz * dh/dzeta = 0.
inline void q_raw_system(const StructureField& J, const Vec& w, Mat& Mz, Mat& Mzbar) {
  int n = J.n;
  auto b = detail::phi_blocks(J, w);
  Mat I = Mat::identity(n);
  Mat ACinv = b.A * b.Cinv;
  Mz = Mat(2 * n, 2 * n);
  Mzbar = Mat(2 * n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double ic = I(i, j) - b.Cinv(i, j);
      double pc = I(i, j) + b.Cinv(i, j);
      double g = ACinv(i, j);
      Mz(i, j) = ic;
      Mz(i, j + n) = -g;
      Mz(i + n, j) = -g;
      Mz(i + n, j + n) = -ic;
      Mzbar(i, j) = pc;
      Mzbar(i, j + n) = -g;
      Mzbar(i + n, j) = g;
      Mzbar(i + n, j + n) = pc;
    }
}

// Complex n x n coefficient of the same system. The recast is exact: with
// w = x + iy the equation reads dw/dzbar + Q(w) * conj(dw/dzeta) = 0.
inline CMat q_coefficient(const StructureField& J, const Vec& w) {
  int n = J.n;
  Mat j = J.value(w);
  Mat A(n, n), C(n, n);
  for (int i = 0; i < n; ++i)
    for (int jj = 0; jj < n; ++jj) {
      A(i, jj) = j(i, jj);
      C(i, jj) = j(i + n, jj);
    }
  Mat Cinv = inverse(C, ErrorKind::SingularLeadingMatrix);
  Mat ACinv = A * Cinv;
  CMat lead(n), trail(n);
  for (int i = 0; i < n; ++i)
    for (int jj = 0; jj < n; ++jj) {
      double d = (i == jj) ? 1.0 : 0.0;
      lead(i, jj) = std::complex<double>(d + Cinv(i, jj), ACinv(i, jj));
      trail(i, jj) = std::complex<double>(d - Cinv(i, jj), -ACinv(i, jj));
    }
  return inverse(lead, ErrorKind::SingularLeadingMatrix) * trail;
}

inline CMat q_coefficient(const TamedChart& chart, const Vec& w) {
  return q_coefficient(chart.pushforward, w);
}

// ---- tangent lift ------------------------------------------------------

// Coordinates on the lifted space are ordered (x, X, y, Y), with (X, Y) the
// fiber variables.
struct TangentLift {
  StructureField base;
  StructureField lifted;  // on R^{4n}
  std::function<Vec(const Vec&)> phi_c;
  std::function<Vec(const Vec&)> phi_base;
};

namespace detail {
inline void lift_blocks(const StructureField& J, const Vec& xi, Mat& A, Mat& B, Mat& C, Mat& D,
                        Mat& al, Mat& be, Mat& ga, Mat& de) {
  int n = J.n;
  Vec q(2 * n);
  Vec fx(n), fy(n);  // fiber components X, Y
  for (int i = 0; i < n; ++i) {
    q[i] = xi[i];
    fx[i] = xi[n + i];
    q[n + i] = xi[2 * n + i];
    fy[i] = xi[3 * n + i];
  }
  Mat j = J.value(q);
  A = Mat(n, n);
  B = Mat(n, n);
  C = Mat(n, n);
  D = Mat(n, n);
  for (int i = 0; i < n; ++i)
    for (int jj = 0; jj < n; ++jj) {
      A(i, jj) = j(i, jj);
      B(i, jj) = j(i, jj + n);
      C(i, jj) = j(i + n, jj);
      D(i, jj) = j(i + n, jj + n);
    }
  al = Mat(n, n);
  be = Mat(n, n);
  ga = Mat(n, n);
  de = Mat(n, n);
  for (int k = 0; k < n; ++k) {
    if (fx[k] != 0.0) {
      Mat dk = J.derivative(q, k);
      for (int i = 0; i < n; ++i)
        for (int jj = 0; jj < n; ++jj) {
          al(i, jj) += fx[k] * dk(i, jj);
          be(i, jj) += fx[k] * dk(i, jj + n);
          ga(i, jj) += fx[k] * dk(i + n, jj);
          de(i, jj) += fx[k] * dk(i + n, jj + n);
        }
    }
    if (fy[k] != 0.0) {
      Mat dk = J.derivative(q, n + k);
      for (int i = 0; i < n; ++i)
        for (int jj = 0; jj < n; ++jj) {
          al(i, jj) += fy[k] * dk(i, jj);
          be(i, jj) += fy[k] * dk(i, jj + n);
          ga(i, jj) += fy[k] * dk(i + n, jj);
          de(i, jj) += fy[k] * dk(i + n, jj + n);
        }
    }
  }
}
}  // namespace detail

inline TangentLift tangent_lift(const StructureField& J) {
  require(J.has_derivatives(), ErrorKind::NoDerivatives, "lift needs derivative access");
  auto base = std::make_shared<StructureField>(J);
  int n = J.n;

  TangentLift lift;
  lift.base = J;
  lift.lifted.n = 2 * n;
  lift.lifted.repr = "tangent-lift";
  lift.lifted.regularity = std::max(1.0, J.regularity - 1.0);
  lift.lifted.value_fn = [base, n](const Vec& xi) {
    Mat A, B, C, D, al, be, ga, de;
    detail::lift_blocks(*base, xi, A, B, C, D, al, be, ga, de);
    Mat out(4 * n, 4 * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        out(i, j) = A(i, j);
        out(i, j + 2 * n) = B(i, j);
        out(i + n, j) = al(i, j);
        out(i + n, j + n) = A(i, j);
        out(i + n, j + 2 * n) = be(i, j);
        out(i + n, j + 3 * n) = B(i, j);
        out(i + 2 * n, j) = C(i, j);
        out(i + 2 * n, j + 2 * n) = D(i, j);
        out(i + 3 * n, j) = ga(i, j);
        out(i + 3 * n, j + n) = C(i, j);
        out(i + 3 * n, j + 2 * n) = de(i, j);
        out(i + 3 * n, j + 3 * n) = D(i, j);
      }
    return out;
  };
  lift.lifted.allow_fd = true;

  lift.phi_c = [base, n](const Vec& xi) {
    Mat A, B, C, D, al, be, ga, de;
    detail::lift_blocks(*base, xi, A, B, C, D, al, be, ga, de);
    Mat Cc(2 * n, 2 * n), Ac(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Ac(i, j) = A(i, j);
        Ac(i + n, j) = al(i, j);
        Ac(i + n, j + n) = A(i, j);
        Cc(i, j) = C(i, j);
        Cc(i + n, j) = ga(i, j);
        Cc(i + n, j + n) = C(i, j);
      }
    Mat CcInv = inverse(Cc, ErrorKind::SingularBlock);
    Vec yY(2 * n), xX(2 * n);
    for (int i = 0; i < 2 * n; ++i) {
      xX[i] = xi[i];
      yY[i] = xi[2 * n + i];
    }
    Vec cy = CcInv * yY;
    Vec gy = Ac * cy;
    Vec out(4 * n);
    for (int i = 0; i < 2 * n; ++i) {
      out[i] = xX[i] - gy[i];
      out[2 * n + i] = cy[i];
    }
    return out;
  };
  lift.phi_base = [base](const Vec& q) { return detail::phi_apply(*base, q); };
  return lift;
}

// Block expansion of a constant linear base change to the lifted coordinate
// order (x, X, y, Y): the lift of x -> P^{-1} x.
inline Mat lift_matrix(const Mat& P) {
  int two_n = P.rows();
  int n = two_n / 2;
  Mat out(2 * two_n, 2 * two_n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double p11 = P(i, j), p12 = P(i, j + n), p21 = P(i + n, j), p22 = P(i + n, j + n);
      out(i, j) = p11;
      out(i, j + 2 * n) = p12;
      out(i + n, j + n) = p11;
      out(i + n, j + 3 * n) = p12;
      out(i + 2 * n, j) = p21;
      out(i + 2 * n, j + 2 * n) = p22;
      out(i + 3 * n, j + n) = p21;
      out(i + 3 * n, j + 3 * n) = p22;
    }
  return out;
}

}  // namespace acdisc
