#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "acdisc/cutoff.hpp"
#include "acdisc/scalar_field.hpp"
#include "acdisc/structure.hpp"

namespace acdisc {

struct LeviEvaluation {
  Vec point;
  Mat matrix;      // symmetric 2n x 2n; X^T M X is the Levi form of u at point
  double min_eig = 0;
  double max_eig = 0;
};

// First-order coupling matrix: A[j][k] = sum_i du/dx_i * dJ[i][j]/dx_k.
inline Mat levi_coupling_matrix(const StructureField& J, const ScalarField& u, const Vec& p) {
  int d = J.dim();
  Vec g = u.grad(p);
  Mat A(d, d);
  for (int k = 0; k < d; ++k) {
    Mat dJ = J.derivative(p, k);
    for (int j = 0; j < d; ++j) {
      double s = 0;
      for (int i = 0; i < d; ++i) s += g[i] * dJ(i, j);
      A(j, k) = s;
    }
  }
  return A;
}

// Symmetric matrix of the form X -> X^T D X + (JX)^T D (JX) + X^T (A - A^T) J X.
inline LeviEvaluation levi_matrix(const StructureField& J, const ScalarField& u, const Vec& p) {
  require(u.dim == J.dim(), ErrorKind::BadInput, "field/structure dimension mismatch");
  int d = J.dim();
  Mat D = u.hess(p);
  Mat Jp = J.value(p);
  Mat A = levi_coupling_matrix(J, u, p);
  Mat skewJ = (A - A.transpose()) * Jp;
  Mat M = D + Jp.transpose() * D * Jp + (skewJ + skewJ.transpose()) * 0.5;
  LeviEvaluation ev;
  ev.point = p;
  ev.matrix = M;
  auto eig = sym_eigen(M);
  ev.min_eig = eig.values.front();
  ev.max_eig = eig.values.back();
  (void)d;
  return ev;
}

// Certified lower bound for the Levi form of u at p under J = J_st + H:
//   min_eig(standard part) - 2 rho ||H||_0 + mu-term - 2 ||grad u|| (1+||H||_0) ||H||_1
// with rho = max |eig(Hess u)|, mu = min eig(Hess u); the mu-term keeps only
// the guaranteed sign (mu<0 pairs with ||H||_0^2, mu>=0 contributes 0).
// Always <= the measured min eigenvalue.
inline double levi_perturbation_bound(const StructureField& J, const ScalarField& u, const Vec& p) {
  int d = J.dim();
  int n = J.n;
  Mat jst = j_standard(n);
  Mat H = J.value(p) - jst;
  double h0 = op_norm(H);

  // ||H(p)||_1 = ||H||_0 + sqrt(sum_i || row-derivative matrix ||_0^2)
  std::vector<Mat> dJ(d);
  for (int k = 0; k < d; ++k) dJ[k] = J.derivative(p, k);
  double deriv_sq = 0;
  for (int i = 0; i < d; ++i) {
    Mat rowmat(d, d);
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) rowmat(j, k) = dJ[k](i, j);
    double nm = op_norm(rowmat);
    deriv_sq += nm * nm;
  }
  double h1 = h0 + std::sqrt(deriv_sq);

  Mat D = u.hess(p);
  auto eig = sym_eigen(D);
  double mu = eig.values.front();
  double rho = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));

  Mat Mst = D + jst.transpose() * D * jst;
  double base = min_eigenvalue(Mst);

  double mu_term = (mu < 0.0) ? mu * h0 * h0 : 0.0;
  double grad_norm = norm2(u.grad(p));
  return base - 2.0 * rho * h0 + mu_term - 2.0 * grad_norm * (1.0 + h0) * h1;
}

struct Lambda0Result {
  double value = 0;      // min over closure x sphere of Levi(u)(X)/||X||^2
  double grid_min = 0;   // before local refinement
  Vec argmin_point;
  Vec argmin_direction;  // unit eigenvector at the argmin
  int evaluations = 0;
  bool refined = false;
};

struct Lambda0Options {
  int refine_starts = 8;       // descent launched from this many best grid points
  double step_tol = 1e-7;
  int jobs = 0;
};

// Spatial minimum of the pointwise smallest Levi eigenvalue: deterministic
// grid scan, then pattern descent with a shrinking step, projected onto the
// domain closure.
inline Lambda0Result lambda0(const StructureField& J, const ScalarField& u, const DomainSpec& D,
                             Lambda0Options opt = {}) {
  require(D.dim() == J.dim(), ErrorKind::BadInput, "domain dimension mismatch");
  auto pts = D.samples();
  require(!pts.empty(), ErrorKind::BadInput, "domain sample set is empty");
  std::vector<double> vals(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) { vals[i] = levi_matrix(J, u, pts[i]).min_eig; },
               opt.jobs);

  std::vector<std::size_t> order(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });

  Lambda0Result res;
  res.grid_min = vals[order.front()];
  res.value = res.grid_min;
  res.argmin_point = pts[order.front()];
  res.evaluations = static_cast<int>(pts.size());

  int d = D.dim();
  double init_step = 0;
  {
    // grid spacing along the first axis as the initial trust step
    int r = D.effective_resolution();
    double extent = (D.shape == DomainSpec::Shape::Ball) ? 2.0 * D.radius : (D.hi[0] - D.lo[0]);
    init_step = extent / (r - 1);
  }

  int nstarts = std::min<std::size_t>(opt.refine_starts, order.size());
  for (int s = 0; s < nstarts; ++s) {
    Vec x = pts[order[s]];
    double fx = vals[order[s]];
    double step = init_step;
    while (step > opt.step_tol) {
      bool improved = false;
      for (int k = 0; k < d && !improved; ++k) {
        for (double sgn : {+1.0, -1.0}) {
          Vec y = x;
          y[k] += sgn * step;
          y = D.project(y);
          double fy = levi_matrix(J, u, y).min_eig;
          ++res.evaluations;
          if (fy < fx - 1e-15) {
            x = y;
            fx = fy;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (fx < res.value) {
      res.value = fx;
      res.argmin_point = x;
    }
  }

  auto ev = levi_matrix(J, u, res.argmin_point);
  auto eig = sym_eigen(ev.matrix);
  res.argmin_direction = Vec(d);
  for (int i = 0; i < d; ++i) res.argmin_direction[i] = eig.vectors(i, 0);
  res.refined = true;
  return res;
}

struct PshBuilderParams {
  Vec p;          // barrier center
  double r = 0.5;
  double A = 2.0;
  double B = 0.0;  // defaults to k when <= 0
  CutoffTheta theta;
  double excluded_radius = 1e-4;  // certificate skips this ball around p
};

struct PshCertificate {
  Lambda0Result lambda0;
  double excluded_radius = 1e-4;  // punctured ball around the center
  bool certified = false;
};

struct PshField {
  ScalarField field;
  PshCertificate certificate;
  double k = 0;  // cutoff constant used for the B >= k gate
};

namespace detail {
inline std::vector<Vec> punctured_samples(const DomainSpec& D, const Vec& p, double excluded) {
  std::vector<Vec> out;
  for (auto& x : D.samples())
    if (norm2(x - p) > excluded) out.push_back(x);
  return out;
}

inline Lambda0Result lambda0_excluding(const StructureField& J, const ScalarField& u,
                                       const DomainSpec& D, const Vec& center, double excluded,
                                       Lambda0Options opt = {}) {
  auto pts = punctured_samples(D, center, excluded);
  require(!pts.empty(), ErrorKind::BadInput, "no samples outside the excluded ball");
  std::vector<double> vals(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) { vals[i] = levi_matrix(J, u, pts[i]).min_eig; },
               opt.jobs);
  std::vector<std::size_t> order(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });

  Lambda0Result res;
  res.grid_min = vals[order.front()];
  res.value = res.grid_min;
  res.argmin_point = pts[order.front()];
  res.evaluations = static_cast<int>(pts.size());

  int d = D.dim();
  int rres = D.effective_resolution();
  double extent = (D.shape == DomainSpec::Shape::Ball) ? 2.0 * D.radius : (D.hi[0] - D.lo[0]);
  double init_step = extent / (rres - 1);
  int nstarts = std::min<std::size_t>(opt.refine_starts, order.size());
  for (int s = 0; s < nstarts; ++s) {
    Vec x = pts[order[s]];
    double fx = vals[order[s]];
    double step = init_step;
    while (step > opt.step_tol) {
      bool improved = false;
      for (int k = 0; k < d && !improved; ++k) {
        for (double sgn : {+1.0, -1.0}) {
          Vec y = x;
          y[k] += sgn * step;
          y = D.project(y);
          if (norm2(y - center) <= excluded) continue;
          double fy = levi_matrix(J, u, y).min_eig;
          ++res.evaluations;
          if (fy < fx - 1e-15) {
            x = y;
            fx = fy;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (fx < res.value) {
      res.value = fx;
      res.argmin_point = x;
    }
  }
  auto eig = sym_eigen(levi_matrix(J, u, res.argmin_point).matrix);
  res.argmin_direction = Vec(d);
  for (int i = 0; i < d; ++i) res.argmin_direction[i] = eig.vectors(i, 0);
  res.refined = true;
  return res;
}
}  // namespace detail

// Log-barrier builder: ln theta(||x-p||^2/r^2) + A||x-p|| + B||x-p||^2/r^2.
// Preconditions: A > 1, B >= k(theta), J(p) = J_st, and the C^1 distance of J
// to J_st over the domain is at most epsilon_m(bound(D)). The certificate is a
// measured lambda0 > 0 on the domain minus a small punctured ball.
inline PshField psh_log_builder(const StructureField& J, const DomainSpec& D, PshBuilderParams prm,
                                Lambda0Options opt = {}) {
  require(prm.r > 0.0, ErrorKind::NonPositive, "barrier radius must be positive");
  require(prm.A > 1.0, ErrorKind::PreconditionFailed, "slope A must exceed 1");
  if (!prm.theta.value) prm.theta = default_cutoff();
  double k = k_constant(prm.theta);
  if (prm.B <= 0.0) prm.B = k;
  require(prm.B >= k - 1e-12, ErrorKind::PreconditionFailed, "quadratic weight B must be >= k(theta)");
  require(static_cast<int>(prm.p.size()) == D.dim(), ErrorKind::BadInput, "center dimension mismatch");

  Mat jp = J.value(prm.p);
  require(op_norm(jp - j_standard(J.n)) <= 1e-10, ErrorKind::PreconditionFailed,
          "structure must be standard at the barrier center");
  double eps = epsilon_m(D.bound());
  double dist = c1_distance_to_standard(J, D);
  require(dist <= eps + 1e-12, ErrorKind::PreconditionFailed,
          "structure too far from standard for the barrier certificate");

  PshField out;
  out.k = k;
  out.field = field_log_barrier(D.dim(), prm.p, prm.r, prm.A, prm.B, prm.theta);
  out.certificate.excluded_radius = prm.excluded_radius;
  out.certificate.lambda0 =
      detail::lambda0_excluding(J, out.field, D, prm.p, out.certificate.excluded_radius, opt);
  out.certificate.certified = out.certificate.lambda0.value > 0.0;
  require(out.certificate.certified, ErrorKind::NotCertified, "barrier failed strictness scan");
  return out;
}

struct DeflatedField {
  ScalarField field;       // w - delta ||x-p||^2
  double certified_lower;  // lambda0(w) - 4.5 delta
  Lambda0Result base_lambda0;
};

// w - delta ||x - p||^2 stays strictly subharmonic in the structure sense as
// long as delta <= (2/9) lambda0(w); certificate lambda0(w) - (9/2) delta.
inline DeflatedField psh_deflate(const StructureField& J, const ScalarField& w, const DomainSpec& D,
                                 const Vec& p, double delta, Lambda0Options opt = {}) {
  require(delta > 0.0, ErrorKind::NonPositive, "deflation delta must be positive");
  DeflatedField out;
  out.base_lambda0 = lambda0(J, w, D, opt);
  require(out.base_lambda0.value > 0.0, ErrorKind::PreconditionFailed, "base field is not strictly subharmonic");
  double cap = (2.0 / 9.0) * out.base_lambda0.value;
  if (delta > cap + 1e-12)
    fail(ErrorKind::DeltaTooLarge, "delta exceeds (2/9) lambda0 of the base field");
  out.field = field_sum(w, field_quadratic_radial(D.dim(), p), -delta);
  out.certified_lower = out.base_lambda0.value - 4.5 * delta;
  return out;
}

// Smallest lambda0(B, J_i, sum y^2) over an atlas of chart-pushed structures.
inline double minimal_curvature(const std::vector<StructureField>& charts, const DomainSpec& D,
                                Lambda0Options opt = {}) {
  require(!charts.empty(), ErrorKind::EmptyAtlas, "no charts supplied");
  double best = 0;
  bool first = true;
  for (const auto& J : charts) {
    ScalarField u = field_sum_y_squared(J.n);
    double v = lambda0(J, u, D, opt).value;
    if (first || v < best) best = v;
    first = false;
  }
  return best;
}

struct DefiningRho {
  ScalarField rho;        // sum r_i^2
  double gram_min = 0;    // smallest Gram determinant of the gradients near the zero set
  double tube_radius = 0; // sublevel radius where lambda0 stays positive
  Lambda0Result tube_lambda0;
};

// rho = sum r_i^2 for a totally real zero set given by defining functions r_i.
// Checks gradient independence near {r = 0} and certifies strict positivity of
// the Levi scan on a sublevel tube found by bisection.
inline DefiningRho defining_rho(const StructureField& J, const std::vector<ScalarField>& r,
                                const DomainSpec& D, Lambda0Options opt = {}) {
  require(!r.empty(), ErrorKind::BadInput, "no defining functions");
  int d = D.dim();
  auto shared = std::make_shared<std::vector<ScalarField>>(r);

  DefiningRho out;
  out.rho.dim = d;
  out.rho.repr = "composite";
  out.rho.val = [shared](const Vec& x) {
    double s = 0;
    for (const auto& f : *shared) {
      double v = f.val(x);
      s += v * v;
    }
    return s;
  };
  out.rho.grad = [shared, d](const Vec& x) {
    Vec g(d, 0.0);
    for (const auto& f : *shared) {
      double v = f.val(x);
      Vec gf = f.grad(x);
      for (int i = 0; i < d; ++i) g[i] += 2.0 * v * gf[i];
    }
    return g;
  };
  out.rho.hess = [shared, d](const Vec& x) {
    Mat h(d, d);
    for (const auto& f : *shared) {
      double v = f.val(x);
      Vec gf = f.grad(x);
      Mat hf = f.hess(x);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) h(i, j) += 2.0 * (gf[i] * gf[j] + v * hf(i, j));
    }
    return h;
  };

  // Gram matrix of {grad r_i} on near-zero samples; its min eigenvalue
  // measures gradient independence.
  int m = static_cast<int>(r.size());
  double near = 0.05;
  bool any = false;
  out.gram_min = std::numeric_limits<double>::infinity();
  for (const auto& x : D.samples()) {
    double s = 0;
    for (const auto& f : *shared) {
      double v = f.val(x);
      s += v * v;
    }
    if (s > near * near) continue;
    any = true;
    Mat G(m, m);
    std::vector<Vec> grads;
    for (const auto& f : *shared) grads.push_back(f.grad(x));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) G(i, j) = dot(grads[i], grads[j]);
    out.gram_min = std::min(out.gram_min, min_eigenvalue(G));
  }
  require(any, ErrorKind::BadInput, "zero set does not meet the sampled domain");
  require(out.gram_min > 1e-8, ErrorKind::DegenerateDefiningFunctions,
          "defining-function gradients are dependent near the zero set");

  // Bisect the largest sublevel rho <= tau^2 on which the Levi scan is positive.
  auto positive_on_tube = [&](double tau) {
    std::vector<Vec> pts;
    for (const auto& x : D.samples())
      if (out.rho.val(x) <= tau * tau) pts.push_back(x);
    if (pts.empty()) return false;
    for (const auto& x : pts)
      if (levi_matrix(J, out.rho, x).min_eig <= 0) return false;
    return true;
  };
  double lo = 0, hi = 1.0;
  if (positive_on_tube(hi)) {
    out.tube_radius = hi;
  } else {
    for (int it = 0; it < 8; ++it) {
      double mid = 0.5 * (lo + hi);
      if (positive_on_tube(mid)) lo = mid;
      else hi = mid;
    }
    out.tube_radius = lo;
  }
  require(out.tube_radius > 0.0, ErrorKind::NotCertified, "no positive tube found");
  (void)opt;
  out.tube_lambda0 = lambda0(J, out.rho, DomainSpec::ball(d, out.tube_radius, Vec(d, 0.0), 5), opt);
  return out;
}

}  // namespace acdisc
