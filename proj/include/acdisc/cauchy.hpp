#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <vector>

#include "acdisc/disc_grid.hpp"
#include "acdisc/linalg.hpp"

namespace acdisc {

using GridFn = std::vector<CVec>;  // node -> value in C^n

inline GridFn make_grid_fn(const DiscGrid& g, int n) { return GridFn(g.size(), CVec(n, 0.0)); }

namespace detail {
// axis 0 -> d/dx, axis 1 -> d/dy; centered where possible, one-sided at the
// rim, zero (and unusable) where no lattice neighbor exists.
inline GridFn grid_axis_derivative(const DiscGrid& G, const GridFn& f, int axis) {
  int n = f.empty() ? 0 : static_cast<int>(f[0].size());
  GridFn out = make_grid_fn(G, n);
  double h = G.h;
  int fwd = axis == 0 ? 0 : 2, bwd = axis == 0 ? 1 : 3;
  parallel_for(G.lattice_count, [&](std::size_t k) {
    auto& nb = G.nbr[k];
    for (int c = 0; c < n; ++c) {
      if (nb[fwd] >= 0 && nb[bwd] >= 0)
        out[k][c] = (f[nb[fwd]][c] - f[nb[bwd]][c]) / (2 * h);
      else if (nb[fwd] >= 0)
        out[k][c] = (f[nb[fwd]][c] - f[k][c]) / h;
      else if (nb[bwd] >= 0)
        out[k][c] = (f[k][c] - f[nb[bwd]][c]) / h;
    }
  });
  return out;
}
}  // namespace detail

inline GridFn grid_dx(const DiscGrid& G, const GridFn& f) {
  return detail::grid_axis_derivative(G, f, 0);
}
inline GridFn grid_dy(const DiscGrid& G, const GridFn& f) {
  return detail::grid_axis_derivative(G, f, 1);
}

namespace detail {
// Antiderivative pieces for the exact integral of 1/(zeta - z) over an
// axis-aligned rectangle. With the pole shifted to the origin,
//   integral s/(s^2+t^2) dA evaluates FR at the corners,
//   integral t/(s^2+t^2) dA evaluates FI at the corners,
// valid on rectangles contained in a closed quadrant.
inline double kernel_pot_r(double s, double t) {
  double r2 = s * s + t * t;
  if (r2 == 0.0) return 0.0;
  double v = t == 0.0 ? 0.0 : 0.5 * t * std::log(r2) - t;
  if (s != 0.0) v += s * std::atan(t / s);
  return v;
}
inline double kernel_pot_i(double s, double t) {
  double r2 = s * s + t * t;
  if (r2 == 0.0) return 0.0;
  double v = s == 0.0 ? 0.0 : 0.5 * s * std::log(r2) - s;
  if (t != 0.0) v += t * std::atan(s / t);
  return v;
}

inline std::complex<double> kernel_rect_piece(double s0, double s1, double t0, double t1) {
  double re = kernel_pot_r(s1, t1) - kernel_pot_r(s0, t1) - kernel_pot_r(s1, t0) + kernel_pot_r(s0, t0);
  double im = kernel_pot_i(s1, t1) - kernel_pot_i(s0, t1) - kernel_pot_i(s1, t0) + kernel_pot_i(s0, t0);
  return {re, -im};  // 1/zeta = (s - i t)/(s^2 + t^2)
}
}  // namespace detail

// Exact integral of 1/(zeta - z) over [x0,x1] x [y0,y1], split at the axes
// through z so every piece sits in one closed quadrant.
inline std::complex<double> kernel_rect_integral(double x0, double x1, double y0, double y1,
                                                 std::complex<double> z) {
  double sx[3], sy[3];
  int ns = 0, nt = 0;
  sx[ns++] = x0 - z.real();
  if (x0 < z.real() && z.real() < x1) sx[ns++] = 0.0;
  sx[ns++] = x1 - z.real();
  sy[nt++] = y0 - z.imag();
  if (y0 < z.imag() && z.imag() < y1) sy[nt++] = 0.0;
  sy[nt++] = y1 - z.imag();
  std::complex<double> acc = 0.0;
  for (int a = 0; a + 1 < ns; ++a)
    for (int b = 0; b + 1 < nt; ++b) acc += detail::kernel_rect_piece(sx[a], sx[a + 1], sy[b], sy[b + 1]);
  return acc;
}

// Cauchy-Green operator P (solving dbar(Pg) = g on the disc) and its
// zeta-derivative T = d o P taken by grid finite differences. The far field
// uses midpoint quadrature with the exact clipped-cell weights; sources
// within near_span cells of a lattice target whose cell is uncut use the
// exact kernel integral (precomputed on a unit-spacing offset table); near
// sources of a ring target are handled by cell subdivision.
class DiscOperators {
 public:
  explicit DiscOperators(std::shared_ptr<const DiscGrid> grid, int near_span = 6)
      : grid_(std::move(grid)), span_(near_span) {
    int w = 2 * span_ + 1;
    table_.assign(static_cast<std::size_t>(w) * w, 0.0);
    for (int di = -span_; di <= span_; ++di)
      for (int dj = -span_; dj <= span_; ++dj) {
        if (di == 0 && dj == 0) continue;  // zero by symmetry
        table_[table_at(di, dj)] =
            kernel_rect_integral(di - 0.5, di + 0.5, dj - 0.5, dj + 0.5, 0.0);
      }
  }

  const DiscGrid& grid() const { return *grid_; }
  const std::shared_ptr<const DiscGrid>& grid_ptr() const { return grid_; }

  GridFn p(const GridFn& g) const {
    const DiscGrid& G = *grid_;
    int n = g.empty() ? 0 : static_cast<int>(g[0].size());
    GridFn out = make_grid_fn(G, n);
    bool all_zero = true;
    for (std::size_t s = 0; s < G.lattice_count && all_zero; ++s)
      for (int c = 0; c < n; ++c)
        if (g[s][c] != 0.0) {
          all_zero = false;
          break;
        }
    if (all_zero) return out;
    parallel_for(G.size(), [&](std::size_t t) {
      CVec acc(n, 0.0);
      std::complex<double> z = G.nodes[t];
      for (std::size_t s = 0; s < G.lattice_count; ++s) {
        std::complex<double> d = G.nodes[s] - z;
        double r2 = std::norm(d);
        if (r2 < 1e-28) continue;  // handled by the near-field correction
        std::complex<double> k = G.weights[s] / d;
        for (int c = 0; c < n; ++c) acc[c] += k * g[s][c];
      }
      near_correction(static_cast<int>(t), g, acc);
      for (int c = 0; c < n; ++c) out[t][c] = -acc[c] / M_PI;
    });
    return out;
  }

  GridFn t(const GridFn& g) const { return d_zeta(p(g)); }

  // Wirtinger derivatives by centered differences, one-sided at the rim.
  GridFn d_zeta(const GridFn& f) const { return wirtinger(f, false); }
  GridFn d_zbar(const GridFn& f) const { return wirtinger(f, true); }

 private:
  std::size_t table_at(int di, int dj) const {
    return static_cast<std::size_t>(di + span_) * (2 * span_ + 1) + (dj + span_);
  }

  void near_correction(int t, const GridFn& g, CVec& acc) const {
    const DiscGrid& G = *grid_;
    int n = static_cast<int>(acc.size());
    double h = G.h;
    std::complex<double> z = G.nodes[t];
    if (!G.is_ring(t)) {
      auto [it, jt] = G.ij[t];
      for (int di = -span_; di <= span_; ++di)
        for (int dj = -span_; dj <= span_; ++dj) {
          int s = G.index(it + di, jt + dj);
          if (s < 0 || !G.full_cell[s]) continue;
          std::complex<double> rule = h * table_[table_at(di, dj)];
          std::complex<double> d = G.nodes[s] - z;
          if (std::norm(d) >= 1e-28) rule -= G.weights[s] / d;
          for (int c = 0; c < n; ++c) acc[c] += rule * g[s][c];
        }
      return;
    }
    // ring target: subdivide every nearby cell
    int ic = static_cast<int>(std::lround(z.real() / h));
    int jc = static_cast<int>(std::lround(z.imag() / h));
    double near2 = (span_ * h) * (span_ * h);
    for (int di = -span_ - 1; di <= span_ + 1; ++di)
      for (int dj = -span_ - 1; dj <= span_ + 1; ++dj) {
        int s = G.index(ic + di, jc + dj);
        if (s < 0) continue;
        std::complex<double> zs = G.nodes[s];
        if (std::norm(zs - z) > near2) continue;
        constexpr int sub = 6;
        std::complex<double> centers[sub * sub];
        int inside = 0;
        for (int a = 0; a < sub; ++a)
          for (int b = 0; b < sub; ++b) {
            std::complex<double> c(zs.real() + (a + 0.5 - sub * 0.5) * h / sub,
                                   zs.imag() + (b + 0.5 - sub * 0.5) * h / sub);
            if (std::norm(c) <= 1.0) centers[inside++] = c;
          }
        std::complex<double> rule = 0.0;
        if (inside > 0) {
          double wsub = G.weights[s] / inside;
          for (int q = 0; q < inside; ++q) {
            std::complex<double> d = centers[q] - z;
            if (std::norm(d) >= 1e-6 * h * h) rule += wsub / d;
          }
        }
        std::complex<double> d = zs - z;
        if (std::norm(d) >= 1e-28) rule -= G.weights[s] / d;
        for (int c = 0; c < n; ++c) acc[c] += rule * g[s][c];
      }
  }

  GridFn wirtinger(const GridFn& f, bool bar) const {
    const DiscGrid& G = *grid_;
    int n = f.empty() ? 0 : static_cast<int>(f[0].size());
    GridFn dx = grid_dx(G, f), dy = grid_dy(G, f);
    GridFn out = make_grid_fn(G, n);
    std::complex<double> iu(0.0, bar ? 1.0 : -1.0);
    for (std::size_t k = 0; k < G.lattice_count; ++k)
      for (int c = 0; c < n; ++c) out[k][c] = 0.5 * (dx[k][c] + iu * dy[k][c]);
    return out;
  }

  std::shared_ptr<const DiscGrid> grid_;
  int span_;
  std::vector<std::complex<double>> table_;
};

}  // namespace acdisc
