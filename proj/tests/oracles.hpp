#pragma once

// Independent reference computations for the test suite. These deliberately
// avoid the library's own assembly routines where the point is to cross-check
// them: finite differences everywhere, dense scans instead of descent, and
// direct quadrature instead of the corrected kernel table.

#include <complex>
#include <random>
#include <vector>

#include "acdisc/cauchy.hpp"
#include "acdisc/harness.hpp"
#include "acdisc/levi.hpp"
#include "acdisc/structure.hpp"

namespace oracles {

using acdisc::Mat;
using acdisc::Vec;

// Hessian of a scalar field by central differences, ignoring any exact
// derivative callbacks the field carries.
inline Mat fd_hessian(const acdisc::ScalarField& u, const Vec& p, double step = 1e-4) {
  int d = u.dim;
  Mat H(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Vec a = p, b = p, c = p, e = p;
      a[i] += step; a[j] += step;
      b[i] += step; b[j] -= step;
      c[i] -= step; c[j] += step;
      e[i] -= step; e[j] -= step;
      H(i, j) = (u.val(a) - u.val(b) - u.val(c) + u.val(e)) / (4 * step * step);
    }
  return H;
}

inline Vec fd_gradient(const acdisc::ScalarField& u, const Vec& p, double step = 1e-6) {
  int d = u.dim;
  Vec g(d);
  for (int i = 0; i < d; ++i) {
    Vec a = p, b = p;
    a[i] += step;
    b[i] -= step;
    g[i] = (u.val(a) - u.val(b)) / (2 * step);
  }
  return g;
}

// Structure-sensitive second-order form evaluated without the library's
// matrix assembly: quadratic part through the finite-difference Hessian in
// the X and JX directions plus the gradient/derivative coupling term.
inline double levi_value(const acdisc::StructureField& J, const acdisc::ScalarField& u,
                         const Vec& p, const Vec& X, double step = 1e-4) {
  int d = u.dim;
  Mat Jp = J.value(p);
  Vec JX = Jp * X;
  Mat H = fd_hessian(u, p, step);
  auto quad = [&](const Vec& a) {
    Vec Ha = H * a;
    double s = 0;
    for (int i = 0; i < d; ++i) s += a[i] * Ha[i];
    return s;
  };
  Vec g = fd_gradient(u, p);
  // coupling: sum_i g_i [ (d_X J) JX - (d_JX J) X ]_i via finite differences of J
  auto dirderiv = [&](const Vec& dir) {
    Vec a = p, b = p;
    for (int i = 0; i < d; ++i) {
      a[i] += step * dir[i];
      b[i] -= step * dir[i];
    }
    return (J.value(a) - J.value(b)) * (1.0 / (2 * step));
  };
  Mat dXJ = dirderiv(X);
  Mat dJXJ = dirderiv(JX);
  Vec c1 = dXJ * JX;   // (d_X J) JX
  Vec c2 = dJXJ * X;   // (d_JX J) X
  double coupling = 0;
  for (int i = 0; i < d; ++i) coupling += g[i] * (c2[i] - c1[i]);
  return quad(X) + quad(JX) + coupling;
}

// Dense scan for the domain minimum of the smallest Levi eigenvalue; no
// descent refinement, just a finer grid than the library default.
inline double brute_lambda0(const acdisc::StructureField& J, const acdisc::ScalarField& u,
                            const acdisc::DomainSpec& D, int res) {
  acdisc::DomainSpec fine = D;
  fine.resolution = res;
  double best = std::numeric_limits<double>::infinity();
  for (auto& p : fine.samples()) best = std::min(best, acdisc::levi_matrix(J, u, p).min_eig);
  return best;
}

// Dense midpoint quadrature of the disc Cauchy kernel against g, with each
// grid cell subdivided sub x sub and sub-cells kept when their center lies
// inside the disc. Slow and simple.
inline std::complex<double> dense_cauchy(const std::function<std::complex<double>(std::complex<double>)>& g,
                                         std::complex<double> z, int m, int sub) {
  double h = 1.0 / m;
  std::complex<double> acc = 0;
  for (int i = -m - 1; i <= m + 1; ++i)
    for (int j = -m - 1; j <= m + 1; ++j)
      for (int si = 0; si < sub; ++si)
        for (int sj = 0; sj < sub; ++sj) {
          double x = (i - 0.5) * h + (si + 0.5) * h / sub;
          double y = (j - 0.5) * h + (sj + 0.5) * h / sub;
          std::complex<double> w(x, y);
          if (std::abs(w) >= 1.0) continue;
          std::complex<double> dws = w - z;
          if (std::norm(dws) < 1e-14) continue;
          acc += g(w) / dws * (h / sub) * (h / sub);
        }
  return -acc / M_PI;
}

// Random structure a fixed C^1 distance from standard: a seeded first-order
// perturbation rescaled until the measured distance hits the target.
inline acdisc::StructureField tamed_structure(int n, double c1_target, std::uint64_t seed,
                                              const acdisc::DomainSpec& D) {
  auto pattern = acdisc::detail::perturbation_pattern(n, seed);
  double amp = c1_target;
  for (int iter = 0; iter < 40; ++iter) {
    auto J = acdisc::structure_from_H(n, acdisc::detail::scaled_pattern(pattern, amp));
    double d = acdisc::c1_distance_to_standard(J, D);
    if (d <= c1_target && d >= 0.5 * c1_target) return J;
    if (d <= 0) break;
    amp *= c1_target / d * 0.9;
  }
  return acdisc::structure_from_H(n, acdisc::detail::scaled_pattern(pattern, amp));
}

}  // namespace oracles
