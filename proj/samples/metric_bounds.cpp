// Certify a strictly subharmonic barrier on the unit ball, then sandwich the
// Kobayashi metric at the center between the certified lower bound and a
// measured disc upper bound.

#include <cstdio>
#include <memory>

#include "acdisc/kobayashi.hpp"

int main() {
  using namespace acdisc;

  StructureField J = structure_standard(1);
  DomainSpec ball = DomainSpec::ball(2);

  PshBuilderParams prm;
  prm.p = Vec(2, 0.0);
  auto barrier = psh_log_builder(J, ball, prm);
  std::printf("barrier: certified=%d, lambda0=%.4f (k=%.6f)\n",
              barrier.certificate.certified ? 1 : 0, barrier.certificate.lambda0.value,
              barrier.k);

  auto u = field_quadratic_radial(2, Vec(2, 0.0), 1.0, -1.0);
  Vec p(2, 0.0), v{1.0, 0.0};
  auto lo = lower_bound(J, ball, u, p, v);
  std::printf("lower: %.6g via %s (lambda0=%.4f, t=%.2f)\n", lo.lower, lo.provenance.c_str(),
              lo.lambda0_used, lo.t);

  auto grid = std::make_shared<const DiscGrid>(make_disc_grid(1.0 / 16));
  DiscOperators ops(grid);
  auto up = upper_bound(zero_coefficient(1), ball, p, v, ops);
  std::printf("upper: %.6g after %d trial discs (%d admissible)\n", up.value, up.attempted,
              up.admissible);
  std::printf("sandwich: %.6g <= K(0, e1) <= %.6g\n", lo.lower, up.value);
  return 0;
}
