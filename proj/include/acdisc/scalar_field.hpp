#pragma once

#include <functional>
#include <memory>
#include <string>

#include "acdisc/cutoff.hpp"
#include "acdisc/linalg.hpp"
#include "acdisc/poly.hpp"

namespace acdisc {

// Scalar function with exact gradient and Hessian callables. Hessians are
// symmetric by construction in every builder below.
struct ScalarField {
  int dim = 0;
  std::string repr = "callable";
  std::function<double(const Vec&)> val;
  std::function<Vec(const Vec&)> grad;
  std::function<Mat(const Vec&)> hess;

  double operator()(const Vec& x) const { return val(x); }
};

// ||x - c||^2 * coeff + offset
inline ScalarField field_quadratic_radial(int dim, Vec c, double coeff = 1.0, double offset = 0.0) {
  if (c.empty()) c = Vec(dim, 0.0);
  ScalarField f;
  f.dim = dim;
  f.repr = "quadratic_radial";
  f.val = [c, coeff, offset](const Vec& x) {
    double s = 0;
    for (std::size_t i = 0; i < c.size(); ++i) s += (x[i] - c[i]) * (x[i] - c[i]);
    return coeff * s + offset;
  };
  f.grad = [c, coeff](const Vec& x) {
    Vec g(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) g[i] = 2.0 * coeff * (x[i] - c[i]);
    return g;
  };
  f.hess = [dim, coeff](const Vec&) { return Mat::identity(dim) * (2.0 * coeff); };
  return f;
}

// sum of squares of the y half of the coordinates: distance^2 to {y=0}.
inline ScalarField field_sum_y_squared(int n) {
  ScalarField f;
  f.dim = 2 * n;
  f.repr = "sum_y_squared";
  f.val = [n](const Vec& x) {
    double s = 0;
    for (int i = 0; i < n; ++i) s += x[n + i] * x[n + i];
    return s;
  };
  f.grad = [n](const Vec& x) {
    Vec g(2 * n, 0.0);
    for (int i = 0; i < n; ++i) g[n + i] = 2.0 * x[n + i];
    return g;
  };
  f.hess = [n](const Vec&) {
    Mat h(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) h(n + i, n + i) = 2.0;
    return h;
  };
  return f;
}

inline ScalarField field_from_poly(Poly p) {
  int d = p.nvars();
  auto shared = std::make_shared<Poly>(std::move(p));
  std::vector<Poly> grads;
  std::vector<Poly> hesses;  // row-major d x d
  for (int k = 0; k < d; ++k) grads.push_back(shared->derivative(k));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) hesses.push_back(grads[i].derivative(j));
  auto gshared = std::make_shared<std::vector<Poly>>(std::move(grads));
  auto hshared = std::make_shared<std::vector<Poly>>(std::move(hesses));
  ScalarField f;
  f.dim = d;
  f.repr = "polynomial";
  f.val = [shared](const Vec& x) { return shared->eval(x); };
  f.grad = [gshared, d](const Vec& x) {
    Vec g(d);
    for (int k = 0; k < d; ++k) g[k] = (*gshared)[k].eval(x);
    return g;
  };
  f.hess = [hshared, d](const Vec& x) {
    Mat h(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) h(i, j) = (*hshared)[static_cast<std::size_t>(i) * d + j].eval(x);
    return h;
  };
  return f;
}

// A ||x-p|| + B ||x-p||^2 / r^2 + ln(theta(||x-p||^2 / r^2)), the log-barrier
// profile. Exact calculus away from x = p:
//   hess(||x-p||)   = (I - V V^T)/||x-p||,   V = (x-p)/||x-p||
//   hess(ln theta)  = alpha I + beta (x-p)(x-p)^T with
//     alpha = (theta'/theta)(w) * 2/r^2, beta = ((theta'' theta - theta'^2)/theta^2)(w) * 4/r^4.
inline ScalarField field_log_barrier(int dim, Vec p, double r, double A, double B,
                                     const CutoffTheta& theta) {
  auto th = std::make_shared<CutoffTheta>(theta);
  ScalarField f;
  f.dim = dim;
  f.repr = "log_barrier";
  f.val = [p, r, A, B, th](const Vec& x) {
    double d = norm2(x - p);
    double w = d * d / (r * r);
    return std::log(th->value(w)) + A * d + B * w;
  };
  f.grad = [p, r, A, B, th](const Vec& x) {
    Vec u = x - p;
    double d = norm2(u);
    require(d > 0.0, ErrorKind::BadInput, "barrier gradient at its center");
    double w = d * d / (r * r);
    double lt = th->d1(w) / th->value(w);
    double s = lt * 2.0 / (r * r) + A / d + 2.0 * B / (r * r);
    return s * u;
  };
  f.hess = [dim, p, r, A, B, th](const Vec& x) {
    Vec u = x - p;
    double d = norm2(u);
    require(d > 0.0, ErrorKind::BadInput, "barrier hessian at its center");
    double w = d * d / (r * r);
    double thv = th->value(w);
    double t1 = th->d1(w), t2 = th->d2(w);
    double alpha = (t1 / thv) * 2.0 / (r * r);
    double beta = ((t2 * thv - t1 * t1) / (thv * thv)) * 4.0 / (r * r * r * r);
    Mat h(dim, dim);
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) {
        double vij = u[i] * u[j];
        h(i, j) = beta * vij + (A / d) * (((i == j) ? 1.0 : 0.0) - vij / (d * d));
      }
      h(i, i) += alpha + 2.0 * B / (r * r);
    }
    return h;
  };
  return f;
}

inline ScalarField field_sum(const ScalarField& a, const ScalarField& b, double cb = 1.0) {
  auto pa = std::make_shared<ScalarField>(a);
  auto pb = std::make_shared<ScalarField>(b);
  ScalarField f;
  f.dim = a.dim;
  f.repr = "composite";
  f.val = [pa, pb, cb](const Vec& x) { return pa->val(x) + cb * pb->val(x); };
  f.grad = [pa, pb, cb](const Vec& x) {
    Vec g = pa->grad(x), h = pb->grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += cb * h[i];
    return g;
  };
  f.hess = [pa, pb, cb](const Vec& x) { return pa->hess(x) + pb->hess(x) * cb; };
  return f;
}

// u(P x): pullback by a constant linear map, grad = P^T grad u(Px),
// hess = P^T H(Px) P.
inline ScalarField field_pullback_linear(const ScalarField& u, const Mat& P) {
  auto pu = std::make_shared<ScalarField>(u);
  Mat Pt = P.transpose();
  ScalarField f;
  f.dim = u.dim;
  f.repr = "composite";
  f.val = [pu, P](const Vec& x) { return pu->val(P * x); };
  f.grad = [pu, P, Pt](const Vec& x) { return Pt * pu->grad(P * x); };
  f.hess = [pu, P, Pt](const Vec& x) { return Pt * pu->hess(P * x) * P; };
  return f;
}

// u(z^{-1}(w)) for an opaque chart inverse; derivatives by central differences.
inline ScalarField field_compose_opaque(const ScalarField& u, std::function<Vec(const Vec&)> map,
                                        double fd = 1e-5) {
  auto pu = std::make_shared<ScalarField>(u);
  auto pm = std::make_shared<std::function<Vec(const Vec&)>>(std::move(map));
  int d = u.dim;
  ScalarField f;
  f.dim = d;
  f.repr = "callable";
  f.val = [pu, pm](const Vec& w) { return pu->val((*pm)(w)); };
  f.grad = [pu, pm, fd, d](const Vec& w) {
    Vec g(d);
    for (int k = 0; k < d; ++k) {
      Vec a = w, b = w;
      a[k] += fd;
      b[k] -= fd;
      g[k] = (pu->val((*pm)(a)) - pu->val((*pm)(b))) / (2 * fd);
    }
    return g;
  };
  f.hess = [pu, pm, fd, d](const Vec& w) {
    Mat h(d, d);
    double f0 = pu->val((*pm)(w));
    for (int i = 0; i < d; ++i) {
      Vec a = w, b = w;
      a[i] += fd;
      b[i] -= fd;
      h(i, i) = (pu->val((*pm)(a)) - 2 * f0 + pu->val((*pm)(b))) / (fd * fd);
      for (int j = i + 1; j < d; ++j) {
        Vec pp = w, pmv = w, mp = w, mm = w;
        pp[i] += fd; pp[j] += fd;
        pmv[i] += fd; pmv[j] -= fd;
        mp[i] -= fd; mp[j] += fd;
        mm[i] -= fd; mm[j] -= fd;
        double v = (pu->val((*pm)(pp)) - pu->val((*pm)(pmv)) - pu->val((*pm)(mp)) + pu->val((*pm)(mm))) /
                   (4 * fd * fd);
        h(i, j) = h(j, i) = v;
      }
    }
    return h;
  };
  return f;
}

}  // namespace acdisc
