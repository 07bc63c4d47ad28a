#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "acdisc/common.hpp"

namespace acdisc {

namespace detail {
// Area of [0,x] x [0,y] intersected with the closed unit disc, x,y >= 0.
inline double quarter_disc_area(double x, double y) {
  if (x <= 0.0 || y <= 0.0) return 0.0;
  x = std::min(x, 1.0);
  y = std::min(y, 1.0);
  if (x * x + y * y <= 1.0) return x * y;
  auto wedge = [](double u) {
    u = std::min(std::max(u, -1.0), 1.0);
    return 0.5 * (u * std::sqrt(std::max(0.0, 1.0 - u * u)) + std::asin(u));
  };
  double sy = std::sqrt(std::max(0.0, 1.0 - y * y));
  return sy * y + (wedge(x) - wedge(sy));
}

inline double signed_quarter_disc_area(double x, double y) {
  double s = 1.0;
  if (x < 0) {
    s = -s;
    x = -x;
  }
  if (y < 0) {
    s = -s;
    y = -y;
  }
  return s * quarter_disc_area(x, y);
}
}  // namespace detail

// Exact area of [x0,x1] x [y0,y1] intersected with the closed unit disc.
inline double cell_disc_area(double x0, double x1, double y0, double y1) {
  using detail::signed_quarter_disc_area;
  return signed_quarter_disc_area(x1, y1) - signed_quarter_disc_area(x0, y1) -
         signed_quarter_disc_area(x1, y0) + signed_quarter_disc_area(x0, y0);
}

// Uniform lattice over the closed unit disc plus a matched-resolution ring
// of boundary nodes on |zeta| = 1. Lattice nodes carry the exact area of
// their Voronoi cell clipped to the disc, so the weights sum to pi exactly;
// ring nodes carry arc weights 2*pi/N instead. A lattice node whose cell
// merely grazes the disc may sit slightly outside the closed disc; all such
// nodes have clipped weights and are never interior.
struct DiscGrid {
  double h = 1.0 / 64;
  int m = 64;
  std::size_t lattice_count = 0;
  int ring_count = 0;

  std::vector<std::complex<double>> nodes;  // lattice first, then ring
  std::vector<double> weights;
  std::vector<double> arc_weights;
  std::vector<std::pair<int, int>> ij;      // lattice integer coords; ring (INT32_MIN, k)
  std::vector<std::array<int, 4>> nbr;      // +x, -x, +y, -y lattice neighbors, -1 absent
  std::vector<int> mirror;                  // index of the conjugate node
  std::vector<std::uint8_t> full_cell;      // cell entirely inside the disc
  std::vector<std::uint8_t> interior;       // all four neighbors present
  int origin = -1;

  std::size_t size() const { return nodes.size(); }
  bool is_ring(int k) const { return k >= static_cast<int>(lattice_count); }

  int index(int i, int j) const {
    auto it = lookup_.find(key(i, j));
    return it == lookup_.end() ? -1 : it->second;
  }

  double total_weight() const {
    double s = 0;
    for (double w : weights) s += w;
    return s;
  }

  long long key(int i, int j) const {
    long long c = m + 4;
    return (static_cast<long long>(i) + c) * (2 * c + 1) + (j + c);
  }
  std::unordered_map<long long, int> lookup_;
};

inline DiscGrid make_disc_grid(double h_grid = 1.0 / 64) {
  require(h_grid > 0.0 && h_grid <= 0.5, ErrorKind::BadInput, "grid spacing out of range");
  DiscGrid g;
  g.m = std::max(2, static_cast<int>(std::lround(1.0 / h_grid)));
  g.h = 1.0 / g.m;
  double h = g.h;

  for (int j = -g.m - 1; j <= g.m + 1; ++j)
    for (int i = -g.m - 1; i <= g.m + 1; ++i) {
      // evaluate at |j| so a cell and its conjugate mirror get the identical
      // float area; otherwise rim slivers near zero can round asymmetrically
      // and leave a node without its mirror partner
      int ja = std::abs(j);
      double a = cell_disc_area((i - 0.5) * h, (i + 0.5) * h, (ja - 0.5) * h, (ja + 0.5) * h);
      if (a <= h * h * 1e-14) continue;
      int idx = static_cast<int>(g.nodes.size());
      g.nodes.emplace_back(i * h, j * h);
      g.weights.push_back(a);
      g.arc_weights.push_back(0.0);
      g.ij.emplace_back(i, j);
      g.full_cell.push_back(a >= h * h * (1.0 - 1e-12) ? 1 : 0);
      g.lookup_[g.key(i, j)] = idx;
    }
  g.lattice_count = g.nodes.size();

  int nring = 2 * static_cast<int>(std::ceil(M_PI * g.m));
  g.ring_count = nring;
  for (int k = 0; k < nring; ++k) {
    // evaluate angles only in the closed upper half and conjugate for the
    // lower half, so mirror pairs are bitwise conjugate
    int ka = std::min(k, nring - k);
    double th = 2.0 * M_PI * ka / nring;
    double c = std::cos(th);
    double s = (ka == 0 || 2 * ka == nring) ? 0.0 : std::sin(th);
    g.nodes.emplace_back(c, k > nring - k ? -s : s);
    g.weights.push_back(0.0);
    g.arc_weights.push_back(2.0 * M_PI / nring);
    g.ij.emplace_back(INT32_MIN, k);
    g.full_cell.push_back(0);
  }

  std::size_t total = g.nodes.size();
  g.nbr.assign(total, {-1, -1, -1, -1});
  g.mirror.assign(total, -1);
  g.interior.assign(total, 0);
  for (std::size_t k = 0; k < g.lattice_count; ++k) {
    auto [i, j] = g.ij[k];
    g.nbr[k] = {g.index(i + 1, j), g.index(i - 1, j), g.index(i, j + 1), g.index(i, j - 1)};
    g.interior[k] =
        (g.nbr[k][0] >= 0 && g.nbr[k][1] >= 0 && g.nbr[k][2] >= 0 && g.nbr[k][3] >= 0) ? 1 : 0;
    g.mirror[k] = g.index(i, -j);
  }
  for (int k = 0; k < nring; ++k) {
    std::size_t idx = g.lattice_count + k;
    int mk = (nring - k) % nring;
    g.mirror[idx] = static_cast<int>(g.lattice_count) + mk;
  }
  g.origin = g.index(0, 0);
  require(g.origin >= 0, ErrorKind::BadInput, "grid lost the origin node");
  return g;
}

}  // namespace acdisc
