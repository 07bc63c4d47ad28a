#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "acdisc/cauchy.hpp"
#include "acdisc/charts.hpp"
#include "acdisc/disc_grid.hpp"

namespace acdisc {

inline CVec to_complex_point(const Vec& x) {
  int n = static_cast<int>(x.size()) / 2;
  CVec out(n);
  for (int i = 0; i < n; ++i) out[i] = {x[i], x[n + i]};
  return out;
}

inline Vec to_real_point(const CVec& w) {
  int n = static_cast<int>(w.size());
  Vec out(2 * n);
  for (int i = 0; i < n; ++i) {
    out[i] = w[i].real();
    out[n + i] = w[i].imag();
  }
  return out;
}

using CoefficientMap = std::function<CMat(const CVec&)>;

inline CoefficientMap coefficient_from_structure(const StructureField& J) {
  auto base = std::make_shared<StructureField>(J);
  return [base](const CVec& w) { return q_coefficient(*base, to_real_point(w)); };
}

inline CoefficientMap coefficient_from_chart(const TamedChart& chart) {
  return coefficient_from_structure(chart.pushforward);
}

inline CoefficientMap zero_coefficient(int n) {
  return [n](const CVec&) { return CMat(n); };
}

// (g(zeta) + conj(g(conj zeta))) / 2; exactly idempotent.
inline GridFn symmetrize(const DiscGrid& G, const GridFn& f) {
  int n = f.empty() ? 0 : static_cast<int>(f[0].size());
  GridFn out = make_grid_fn(G, n);
  for (std::size_t k = 0; k < f.size(); ++k) {
    int mk = G.mirror[k];
    require(mk >= 0, ErrorKind::BadInput, "grid node lacks a conjugate mirror");
    for (int c = 0; c < n; ++c) out[k][c] = 0.5 * (f[k][c] + std::conj(f[mk][c]));
  }
  return out;
}

struct SolveOptions {
  double tol = 1e-7;
  int max_iter = 200;
  bool attached = false;          // symmetrize the density each iteration
  double attach_tol = 1e-8;       // allowed |y*| on the diameter
};

struct DiscSolution {
  std::shared_ptr<const DiscGrid> grid;
  int n = 0;
  GridFn values;    // h at every node
  GridFn density;   // the dbar-density f (solver-consistent dbar h)
  GridFn dzeta;     // beta + Tf at lattice nodes
  Vec center, direction;

  double residual = 0;            // fixed-point defect sup norm at the returned iterate
  double residual_fd = 0;         // finite-difference equation residual, interior sup
  double band_residual = 0;       // same, restricted to |Im zeta| <= 2h
  double off_band_residual = 0;   // interior away from the band
  double diameter_imag_sup = 0;   // sup |y*| over diameter nodes
  double contraction_ratio = 0;   // max successive increment ratio
  int iterations = 0;
  bool converged = false;
  bool reflected = false;
  bool attached = false;
  std::vector<double> increments;
};

namespace detail {
inline double grid_sup(const GridFn& f, std::size_t count) {
  double s = 0;
  for (std::size_t k = 0; k < count; ++k) {
    double a = 0;
    for (auto& c : f[k]) a += std::norm(c);
    s = std::max(s, std::sqrt(a));
  }
  return s;
}

inline CVec conj_vec(const CVec& v) {
  CVec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::conj(v[i]);
  return out;
}

// FD residual of dbar g + A(zeta) conj(d g) with A supplied per node.
inline void fd_residuals(const DiscOperators& ops, const GridFn& g,
                         const std::function<CMat(int)>& coeff_at, DiscSolution& sol) {
  const DiscGrid& G = ops.grid();
  GridFn db = ops.d_zbar(g);
  GridFn dz = ops.d_zeta(g);
  double full = 0, band = 0, off = 0;
  std::vector<double> res(G.lattice_count, 0.0);
  parallel_for(G.lattice_count, [&](std::size_t k) {
    if (!G.interior[k]) return;
    CVec r = db[k] + coeff_at(static_cast<int>(k)) * conj_vec(dz[k]);
    double a = 0;
    for (auto& c : r) a += std::norm(c);
    res[k] = std::sqrt(a);
  });
  for (std::size_t k = 0; k < G.lattice_count; ++k) {
    if (!G.interior[k]) continue;
    full = std::max(full, res[k]);
    if (std::abs(G.ij[k].second) <= 2)
      band = std::max(band, res[k]);
    else
      off = std::max(off, res[k]);
  }
  sol.residual_fd = full;
  sol.band_residual = band;
  sol.off_band_residual = off;
}
}  // namespace detail

// Fixed-point solve of dbar h + Q(h) conj(d h) = 0 with h(0) = p and
// dh(d/dx)(0) = v held exactly by re-fitting the affine part each sweep.
// The unknown is the density f with h = alpha + beta zeta + Pf, so that
// dbar h = f identically and d h = beta + Tf.
inline DiscSolution solve_disc(const CoefficientMap& Q, const Vec& p, const Vec& v,
                               const DiscOperators& ops, SolveOptions opt = {}) {
  const DiscGrid& G = ops.grid();
  int n = static_cast<int>(p.size()) / 2;
  require(p.size() == v.size() && p.size() % 2 == 0, ErrorKind::BadInput,
          "point and direction must live in R^{2n}");
  if (opt.attached) {
    for (int i = 0; i < n; ++i) {
      require(std::abs(p[n + i]) <= 1e-12, ErrorKind::PreconditionFailed,
              "anchor must lie on {y* = 0}");
      require(std::abs(v[n + i]) <= 1e-12, ErrorKind::PreconditionFailed,
              "direction must be tangent to {y* = 0}");
    }
  }

  CVec pc = to_complex_point(p), vc = to_complex_point(v);
  GridFn f = make_grid_fn(G, n);
  DiscSolution sol;
  sol.grid = ops.grid_ptr();
  sol.n = n;
  sol.center = p;
  sol.direction = v;
  sol.attached = opt.attached;

  auto sweep = [&](const GridFn& fcur, GridFn& h, GridFn& dh, GridFn& fnext) {
    GridFn Pf = ops.p(fcur);
    GridFn Tf = ops.t(fcur);
    CVec alpha(n), beta(n);
    for (int c = 0; c < n; ++c) {
      alpha[c] = pc[c] - Pf[G.origin][c];
      beta[c] = vc[c] - Tf[G.origin][c] - fcur[G.origin][c];
    }
    h = make_grid_fn(G, n);
    dh = make_grid_fn(G, n);
    for (std::size_t k = 0; k < G.size(); ++k)
      for (int c = 0; c < n; ++c) h[k][c] = alpha[c] + beta[c] * G.nodes[k] + Pf[k][c];
    for (std::size_t k = 0; k < G.lattice_count; ++k)
      for (int c = 0; c < n; ++c) dh[k][c] = beta[c] + Tf[k][c];
    fnext = make_grid_fn(G, n);
    parallel_for(G.lattice_count, [&](std::size_t k) {
      CVec val = Q(h[k]) * detail::conj_vec(dh[k]);
      for (int c = 0; c < n; ++c) fnext[k][c] = -val[c];
    });
    if (opt.attached) fnext = symmetrize(G, fnext);
  };

  GridFn h, dh, fnext;
  int worse_streak = 0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    sweep(f, h, dh, fnext);
    double inc = 0;
    for (std::size_t k = 0; k < G.lattice_count; ++k) {
      double a = 0;
      for (int c = 0; c < n; ++c) a += std::norm(fnext[k][c] - f[k][c]);
      inc = std::max(inc, std::sqrt(a));
    }
    if (!sol.increments.empty()) {
      if (inc >= sol.increments.back())
        ++worse_streak;
      else
        worse_streak = 0;
      if (sol.increments.back() > 0)
        sol.contraction_ratio = std::max(sol.contraction_ratio, inc / sol.increments.back());
    }
    sol.increments.push_back(inc);
    sol.iterations = it;
    f = fnext;
    if (inc <= opt.tol) {
      sol.converged = true;
      break;
    }
    if (worse_streak >= 5)
      fail(ErrorKind::NoContraction, "iteration increments not decreasing over 5 steps");
  }
  if (!sol.converged) fail(ErrorKind::MaxIter, "disc solve did not reach tolerance");

  // rebuild fields at the converged density, then measure the defect there
  sweep(f, h, dh, fnext);
  double defect = 0;
  for (std::size_t k = 0; k < G.lattice_count; ++k) {
    double a = 0;
    for (int c = 0; c < n; ++c) a += std::norm(fnext[k][c] - f[k][c]);
    defect = std::max(defect, std::sqrt(a));
  }
  sol.residual = defect;
  sol.values = h;
  sol.density = f;
  sol.dzeta = dh;
  for (std::size_t k = 0; k < G.lattice_count; ++k)
    if (G.ij[k].second == 0)
      for (int c = 0; c < n; ++c)
        sol.diameter_imag_sup = std::max(sol.diameter_imag_sup, std::abs(h[k][c].imag()));
  if (opt.attached)
    require(sol.diameter_imag_sup <= opt.tol, ErrorKind::NotAttached,
            "diameter values kept a y* component above tolerance");

  detail::fd_residuals(ops, h, [&](int k) { return Q(h[k]); }, sol);
  return sol;
}

inline DiscSolution solve_attached_disc(const CoefficientMap& Q, const Vec& anchor,
                                        const Vec& direction, const DiscOperators& ops,
                                        SolveOptions opt = {}) {
  opt.attached = true;
  return solve_disc(Q, anchor, direction, ops, opt);
}

// Schwarz reflection: keep h above the diameter, conj(h(conj zeta)) below.
// Diameter values are projected to real (they must already be within
// attach_tol of real, else NotAttached). The reported FD residual uses the
// piecewise coefficient Q(g(zeta)) above and conj(Q(g(conj zeta))) below.
inline DiscSolution reflect_extend(const DiscSolution& upper, const CoefficientMap& Q,
                                   const DiscOperators& ops, double attach_tol = 1e-8) {
  const DiscGrid& G = ops.grid();
  const GridFn& h = upper.values;
  int n = upper.n;

  double sup = 0;
  for (std::size_t k = 0; k < G.lattice_count; ++k)
    if (G.ij[k].second == 0)
      for (int c = 0; c < n; ++c) sup = std::max(sup, std::abs(h[k][c].imag()));
  require(sup <= attach_tol, ErrorKind::NotAttached,
          "diameter values are not real within the attachment tolerance");

  DiscSolution out = upper;
  out.reflected = true;
  out.diameter_imag_sup = 0;
  GridFn g = make_grid_fn(G, n);
  GridFn fg = make_grid_fn(G, n);
  for (std::size_t k = 0; k < G.size(); ++k) {
    double im = G.nodes[k].imag();
    if (im > 0) {
      g[k] = h[k];
      if (k < G.lattice_count) fg[k] = upper.density[k];
    } else if (im < 0) {
      int mk = G.mirror[k];
      g[k] = detail::conj_vec(h[mk]);
      if (k < G.lattice_count) fg[k] = detail::conj_vec(upper.density[mk]);
    } else {
      for (int c = 0; c < n; ++c) g[k][c] = h[k][c].real();
      if (k < G.lattice_count)
        for (int c = 0; c < n; ++c) fg[k][c] = upper.density[k][c];
    }
  }
  out.values = g;
  out.density = fg;

  auto coeff_at = [&](int k) {
    if (G.nodes[k].imag() >= 0) return Q(g[k]);
    return Q(g[G.mirror[k]]).conj();
  };
  detail::fd_residuals(ops, g, coeff_at, out);
  return out;
}

}  // namespace acdisc
