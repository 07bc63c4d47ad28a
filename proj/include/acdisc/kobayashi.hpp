#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "acdisc/charts.hpp"
#include "acdisc/constants.hpp"
#include "acdisc/disc_solver.hpp"
#include "acdisc/levi.hpp"

namespace acdisc {

struct EpsilonCheckReport {
  bool passed = false;
  std::string failing_condition;
  Vec worst_point;
  double frame_norm_max = 0;
  double frame_inv_norm_max = 0;
  double c1_max = 0;
  int points_checked = 0;
};

struct BoundReport {
  double lower = 0;
  std::optional<double> upper;
  double lambda0_used = 0;
  double k = 0, c_prime = 0, c_m_used = 0, t = 1.0, epsilon_used = 0;
  std::uint64_t constants_hash = 0;
  Vec p, v;
  std::string provenance;
  Lambda0Result lambda0_detail;
  EpsilonCheckReport epsilon_checks;
};

struct LocalizationReport {
  double N = 0;
  double s = 0;                 // 1 - exp(-N dist)
  double dist = 0;              // 1 - ||z(q)||, exact for the ball chart
  double c = 0;                 // deflation constant
  double radius = 0;            // certified neighborhood radius around the chart center
  double deflation_margin = 0;  // lambda0(u) - 4.5 c
  double barrier_r = 0;         // barrier scale used for the neighborhood check
  std::uint64_t constants_hash = 0;
};

struct KobayashiOptions {
  double m = 1.0;              // taming index for the basepoint formula
  int check_resolution = 5;    // sample resolution for the frame condition scan
  double t_floor = 1.0 / 1048576;
  Lambda0Options lambda0;
};

namespace detail {
// Negative on the open domain; barriers may vanish on the boundary itself,
// so samples that sit on (or within lattice jitter of) the boundary only
// need to stay below a small positive slack.
inline void check_negative(const ScalarField& u, const DomainSpec& D) {
  const double slack = 1e-9;
  for (auto& x : D.samples()) {
    double v = u.val(x);
    require(v <= slack, ErrorKind::PreconditionFailed,
            "barrier field is not negative on the domain closure");
    double gap;  // distance from x to the boundary
    if (D.shape == DomainSpec::Shape::Ball) {
      gap = D.radius - norm2(x - D.center);
    } else {
      gap = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < x.size(); ++i)
        gap = std::min({gap, x[i] - D.lo[i], D.hi[i] - x[i]});
    }
    if (gap > 1e-6)
      require(v < 0.0, ErrorKind::PreconditionFailed,
              "barrier field is not negative inside the domain");
  }
}

inline DomainSpec with_resolution(DomainSpec D, int res) {
  D.resolution = res;
  return D;
}

// The three admissibility conditions of the per-point frame change, scanned
// over a coarse sample of the domain: frame invertible with norm bounds, and
// the frame-conjugated structure within epsilon_{m=2} of standard in C^1.
inline EpsilonCheckReport epsilon_prime_scan(const StructureField& J, const DomainSpec& D,
                                             int check_resolution) {
  EpsilonCheckReport rep;
  double eps = epsilon_m(2.0);
  DomainSpec probe = with_resolution(D, check_resolution);
  for (auto& q : probe.samples()) {
    ++rep.points_checked;
    Mat P = frame_matrix(J, q);
    if (min_singular_value(P) <= 1e-10) {
      rep.failing_condition = "frame matrix singular";
      rep.worst_point = q;
      return rep;
    }
    double np = op_norm(P);
    double ni = op_norm(inverse(P));
    rep.frame_norm_max = std::max(rep.frame_norm_max, np);
    rep.frame_inv_norm_max = std::max(rep.frame_inv_norm_max, ni);
    if (np > 2.0 + 1e-12) {
      rep.failing_condition = "frame norm exceeds 2";
      rep.worst_point = q;
      return rep;
    }
    if (ni > 2.0 + 1e-12) {
      rep.failing_condition = "frame inverse norm exceeds 2";
      rep.worst_point = q;
      return rep;
    }
    double c1 = c1_distance_to_standard(pushforward_linear(J, P), D);
    rep.c1_max = std::max(rep.c1_max, c1);
    if (c1 > eps + 1e-12) {
      rep.failing_condition = "conjugated structure exceeds epsilon_{m=2} in C^1";
      rep.worst_point = q;
      return rep;
    }
  }
  rep.passed = true;
  return rep;
}

inline void stamp_constants(BoundReport& rep) {
  const auto& C = constants();
  rep.k = C.k;
  rep.c_prime = C.c_prime;
  rep.constants_hash = C.hash();
}
}  // namespace detail

// lower = c_m sqrt(lambda0) ||v|| / sqrt(|u(p)|), valid when the structure
// is standard at p and epsilon_m-close to standard in C^1 over the closure.
inline BoundReport lower_bound_basepoint(const StructureField& J, const DomainSpec& D,
                                         const ScalarField& u, const Vec& p, const Vec& v,
                                         KobayashiOptions opt = {}) {
  BoundReport rep;
  rep.p = p;
  rep.v = v;
  rep.provenance = "basepoint";
  detail::stamp_constants(rep);

  Mat dev = J.value(p) - j_standard(J.n);
  require(dev.max_abs() <= 1e-10, ErrorKind::PreconditionFailed,
          "structure is not standard at the basepoint");
  rep.epsilon_used = epsilon_m(opt.m);
  double c1 = c1_distance_to_standard(J, D);
  require(c1 <= rep.epsilon_used + 1e-12, ErrorKind::PreconditionFailed,
          "C^1 distance to the standard structure exceeds epsilon_m");
  detail::check_negative(u, D);
  rep.lambda0_detail = lambda0(J, u, D, opt.lambda0);
  rep.lambda0_used = rep.lambda0_detail.value;
  require(rep.lambda0_used > 0.0, ErrorKind::PreconditionFailed,
          "Levi floor of the barrier is not positive");

  rep.c_m_used = constants().c_m(opt.m);
  rep.lower = rep.c_m_used * std::sqrt(rep.lambda0_used) * norm2(v) / std::sqrt(-u.val(p));
  return rep;
}

// lower = c' e^{-2t} sqrt(lambda0) ||v|| / sqrt(|u(p)|) for D inside the
// unit ball (t = outer radius), gated on the frame conditions everywhere.
inline BoundReport lower_bound(const StructureField& J, const DomainSpec& D, const ScalarField& u,
                               const Vec& p, const Vec& v, KobayashiOptions opt = {}) {
  BoundReport rep;
  rep.p = p;
  rep.v = v;
  rep.provenance = "frame";
  detail::stamp_constants(rep);
  rep.epsilon_used = epsilon_m(2.0);

  rep.t = D.bound();
  require(rep.t <= 1.0 + 1e-12, ErrorKind::PreconditionFailed,
          "domain is not contained in the unit ball");
  rep.epsilon_checks = detail::epsilon_prime_scan(J, D, opt.check_resolution);
  if (!rep.epsilon_checks.passed)
    fail(ErrorKind::EpsilonPrimeViolated,
         rep.epsilon_checks.failing_condition + " at " + [&] {
           std::string s = "(";
           for (std::size_t i = 0; i < rep.epsilon_checks.worst_point.size(); ++i)
             s += (i ? "," : "") + std::to_string(rep.epsilon_checks.worst_point[i]);
           return s + ")";
         }());
  detail::check_negative(u, D);
  rep.lambda0_detail = lambda0(J, u, D, opt.lambda0);
  rep.lambda0_used = rep.lambda0_detail.value;
  require(rep.lambda0_used > 0.0, ErrorKind::PreconditionFailed,
          "Levi floor of the barrier is not positive");

  rep.lower = constants().c_prime * std::exp(-2.0 * rep.t) * std::sqrt(rep.lambda0_used) *
              norm2(v) / std::sqrt(-u.val(p));
  return rep;
}

// Chart version: dilate the chart until the frame conditions hold on the
// unit ball (largest dyadic factor), then apply the t^2 Levi scaling and
// measure the direction through the dilated chart differential.
inline BoundReport lower_bound_chart(const StructureField& J, const TamedChart& chart,
                                     const DomainSpec& D, const ScalarField& u, const Vec& p,
                                     const Vec& v, KobayashiOptions opt = {}) {
  (void)J;
  BoundReport rep;
  rep.p = p;
  rep.v = v;
  rep.provenance = "chart";
  detail::stamp_constants(rep);
  rep.epsilon_used = epsilon_m(2.0);

  int dim = 2 * chart.n;
  DomainSpec ball = DomainSpec::ball(dim, 1.0, Vec(dim, 0.0), D.resolution);
  double t = 1.0;
  bool found = false;
  while (t >= opt.t_floor) {
    StructureField Jt = structure_dilate(chart.pushforward, t);
    rep.epsilon_checks = detail::epsilon_prime_scan(Jt, ball, opt.check_resolution);
    if (rep.epsilon_checks.passed) {
      found = true;
      break;
    }
    t *= 0.5;
  }
  if (!found)
    fail(ErrorKind::EpsilonPrimeViolated,
         "no dilation passes the frame conditions: " + rep.epsilon_checks.failing_condition);
  rep.t = t;

  ScalarField u_chart = field_compose_opaque(u, chart.inverse);
  DomainSpec ball_t = DomainSpec::ball(dim, t, Vec(dim, 0.0), D.resolution);
  rep.lambda0_detail = lambda0(chart.pushforward, u_chart, ball_t, opt.lambda0);
  rep.lambda0_used = t * t * rep.lambda0_detail.value;  // Levi scaling of the dilation
  require(rep.lambda0_used > 0.0, ErrorKind::PreconditionFailed,
          "Levi floor of the barrier is not positive");
  require(u.val(p) < 0.0, ErrorKind::PreconditionFailed, "barrier not negative at basepoint");

  Vec dz = (1.0 / t) * chart.push_tangent(p, v);
  rep.lower = constants().c_prime * std::exp(-2.0 * t) * std::sqrt(rep.lambda0_used) * norm2(dz) /
              std::sqrt(-u.val(p));
  return rep;
}

// N = (e^{-1}/sqrt(k)) sqrt(c/|u(q)|), s = 1 - exp(-N (1 - ||q||)).
// The deflation constant c must certify u - c||x||^2 strictly subharmonic;
// the neighborhood radius is the largest dyadic radius whose sphere passes
// the log-barrier certificate spot-check.
inline LocalizationReport localization(const StructureField& J, const DomainSpec& D,
                                       const ScalarField& u, double c, const Vec& q,
                                       KobayashiOptions opt = {}) {
  require(c > 0.0, ErrorKind::NonPositive, "deflation constant must be positive");
  require(u.val(q) < 0.0, ErrorKind::PreconditionFailed, "field must be negative at the point");
  double nq = norm2(q);
  require(nq < 1.0, ErrorKind::PreconditionFailed, "point must lie inside the unit ball chart");

  LocalizationReport rep;
  rep.c = c;
  rep.constants_hash = constants().hash();
  int dim = D.dim();
  try {
    auto defl = psh_deflate(J, u, D, Vec(dim, 0.0), c, opt.lambda0);
    rep.deflation_margin = defl.certified_lower;
  } catch (const Error&) {
    fail(ErrorKind::NotCertified, "deflation by c is not certified");
  }
  require(rep.deflation_margin > 0.0, ErrorKind::NotCertified,
          "deflation certificate is not strictly positive");

  double k = constants().k;
  rep.N = std::exp(-1.0) / std::sqrt(k) * std::sqrt(c / -u.val(q));
  rep.dist = 1.0 - nq;
  rep.s = 1.0 - std::exp(-rep.N * rep.dist);

  // spot-check the barrier certificate at sphere points of dyadic radius
  rep.barrier_r = std::clamp(std::sqrt(k * -u.val(q) / c), 1e-3, 0.5);
  double radius = 0.5;
  while (radius >= 1.0 / 64) {
    bool ok = true;
    std::vector<Vec> centers{Vec(dim, 0.0)};
    for (int i = 0; i < dim && ok; ++i) {
      Vec e(dim, 0.0);
      e[i] = radius;
      centers.push_back(e);
      e[i] = -radius;
      centers.push_back(e);
    }
    for (auto& ctr : centers) {
      ScalarField barrier =
          field_log_barrier(dim, ctr, rep.barrier_r, 1.05, constants().k, default_cutoff());
      auto res = detail::lambda0_excluding(J, barrier, D, ctr, 1e-4, opt.lambda0);
      if (res.value <= 0.0) {
        ok = false;
        break;
      }
    }
    if (ok) break;
    radius *= 0.5;
  }
  rep.radius = radius >= 1.0 / 64 ? radius : 0.0;
  require(rep.radius > 0.0, ErrorKind::NotCertified, "no neighborhood radius could be certified");
  return rep;
}

struct UpperBound {
  double value = std::numeric_limits<double>::infinity();
  double best_alpha = 0;
  int attempted = 0;
  int admissible = 0;
  bool feasible = false;
};

// Any converged disc through p with dh(d/dx)(0) = v/alpha staying inside D
// certifies K(p, v) <= alpha; scan a geometric trial grid and refine once.
inline UpperBound upper_bound(const CoefficientMap& Q, const DomainSpec& D, const Vec& p,
                              const Vec& v, const DiscOperators& ops,
                              std::vector<double> trials = {}, SolveOptions sopt = {}) {
  UpperBound ub;
  if (!D.contains(p)) return ub;
  if (trials.empty()) {
    for (int i = 0; i < 50; ++i) trials.push_back(0.02 * std::pow(50.0 / 0.02, i / 49.0));
  }
  std::sort(trials.begin(), trials.end());

  auto admissible = [&](double alpha) -> bool {
    ++ub.attempted;
    try {
      DiscSolution sol = solve_disc(Q, p, (1.0 / alpha) * v, ops, sopt);
      const auto& nodes = ops.grid().nodes;
      for (std::size_t k = 0; k < sol.values.size(); ++k) {
        // clipped-cell centers sit past the rim; the disc map is only
        // constrained on the closed disc itself
        if (std::abs(nodes[k]) > 1.0 + 1e-12) continue;
        if (!D.contains(to_real_point(sol.values[k]))) return false;
      }
      ++ub.admissible;
      return true;
    } catch (const Error&) {
      return false;
    }
  };

  double best = 0, last_rejected = 0;
  for (double a : trials) {
    if (admissible(a)) {
      best = a;
      break;
    }
    last_rejected = a;
  }
  if (best == 0) return ub;

  if (last_rejected > 0) {  // one geometric refinement pass
    for (int i = 1; i < 50; ++i) {
      double a = last_rejected * std::pow(best / last_rejected, i / 49.0);
      if (admissible(a)) {
        best = a;
        break;
      }
    }
  }
  ub.value = best;
  ub.best_alpha = best;
  ub.feasible = true;
  return ub;
}

}  // namespace acdisc
