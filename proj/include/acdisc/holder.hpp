#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "acdisc/cauchy.hpp"
#include "acdisc/disc_solver.hpp"

namespace acdisc {

struct RegionSpec {
  std::complex<double> center = 0.0;
  double radius = 1.0;
  double min_im = -2.0;  // raise to 0 for upper-half regions

  bool contains(std::complex<double> z) const {
    return std::abs(z - center) <= radius + 1e-15 && z.imag() >= min_im - 1e-15;
  }
};

struct HolderReport {
  double exponent = 0.5;
  int order = 0;
  double seminorm = 0;
  double sup_norm = 0;  // sum of derivative sup-norms through the given order
  double total = 0;
  std::size_t pair_count = 0;
  std::vector<double> order_sups;
  std::complex<double> extremal_a = 0, extremal_b = 0;
};

namespace detail {
inline double field_block_norm(const std::vector<GridFn>& fields, std::size_t k) {
  double a = 0;
  for (auto& f : fields)
    for (auto& c : f[k]) a += std::norm(c);
  return std::sqrt(a);
}

inline double field_block_dist(const std::vector<GridFn>& fields, std::size_t k1, std::size_t k2) {
  double a = 0;
  for (auto& f : fields)
    for (std::size_t c = 0; c < f[k1].size(); ++c) a += std::norm(f[k1][c] - f[k2][c]);
  return std::sqrt(a);
}
}  // namespace detail

// C^{k+beta} measurement over the lattice nodes inside K: sup-norms of all
// finite-difference derivatives through order k, plus the beta-seminorm of
// the order-k derivative block over node pairs at least 2h apart. Pairs are
// exhaustive up to pair_cap and a seeded random sample beyond it.
inline HolderReport holder_norm(const DiscGrid& G, const GridFn& g, const RegionSpec& K,
                                double beta, int order, std::uint64_t seed = 0x5eed1234u,
                                std::size_t pair_cap = 1000000) {
  require(beta > 0.0 && beta <= 1.0, ErrorKind::BadInput, "exponent must lie in (0, 1]");
  require(order >= 0, ErrorKind::BadInput, "derivative order must be nonnegative");

  std::vector<int> sel;
  for (std::size_t k = 0; k < G.lattice_count; ++k)
    if (K.contains(G.nodes[k])) sel.push_back(static_cast<int>(k));
  if (sel.size() < 10) fail(ErrorKind::RegionTooSmall, "fewer than 10 grid nodes in the region");

  if (order > 0)
    for (int k : sel) {
      auto& nb = G.nbr[k];
      require((nb[0] >= 0 || nb[1] >= 0) && (nb[2] >= 0 || nb[3] >= 0),
              ErrorKind::PreconditionFailed, "derivatives unavailable inside the region");
    }

  // fields[j][a] = d_x^a d_y^{j-a} g
  std::vector<std::vector<GridFn>> fields(order + 1);
  fields[0] = {g};
  for (int j = 1; j <= order; ++j) {
    fields[j].resize(j + 1);
    fields[j][0] = grid_dy(G, fields[j - 1][0]);
    for (int a = 1; a <= j; ++a) fields[j][a] = grid_dx(G, fields[j - 1][a - 1]);
  }

  HolderReport rep;
  rep.exponent = beta;
  rep.order = order;
  for (int j = 0; j <= order; ++j) {
    double s = 0;
    for (int k : sel) s = std::max(s, detail::field_block_norm(fields[j], k));
    rep.order_sups.push_back(s);
    rep.sup_norm += s;
  }

  auto consider = [&](int a, int b) {
    std::complex<double> za = G.nodes[sel[a]], zb = G.nodes[sel[b]];
    double d = std::abs(za - zb);
    if (d < 2.0 * G.h) return;
    double q = detail::field_block_dist(fields[order], sel[a], sel[b]) / std::pow(d, beta);
    ++rep.pair_count;
    if (q > rep.seminorm) {
      rep.seminorm = q;
      rep.extremal_a = za;
      rep.extremal_b = zb;
    }
  };

  std::size_t nsel = sel.size();
  std::size_t all_pairs = nsel * (nsel - 1) / 2;
  if (all_pairs <= pair_cap) {
    for (std::size_t a = 0; a < nsel; ++a)
      for (std::size_t b = a + 1; b < nsel; ++b) consider(static_cast<int>(a), static_cast<int>(b));
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, nsel - 1);
    for (std::size_t t = 0; t < pair_cap; ++t) {
      std::size_t a = pick(rng), b = pick(rng);
      if (a == b) continue;
      consider(static_cast<int>(a), static_cast<int>(b));
    }
  }
  rep.total = rep.sup_norm + rep.seminorm;
  return rep;
}

inline HolderReport holder_norm(const DiscSolution& sol, const RegionSpec& K, double beta,
                                int order, std::uint64_t seed = 0x5eed1234u,
                                std::size_t pair_cap = 1000000) {
  return holder_norm(*sol.grid, sol.values, K, beta, order, seed, pair_cap);
}

}  // namespace acdisc
