#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "acdisc/charts.hpp"
#include "acdisc/cutoff.hpp"
#include "acdisc/harness.hpp"
#include "oracles.hpp"

using namespace acdisc;

namespace {

StructureField seeded(int n, double amp, std::uint64_t seed) {
  auto pat = detail::perturbation_pattern(n, seed);
  return structure_from_H(n, detail::scaled_pattern(pat, amp));
}

Vec ri(const CVec& v) {
  int n = static_cast<int>(v.size());
  Vec out(2 * n);
  for (int i = 0; i < n; ++i) {
    out[i] = v[i].real();
    out[n + i] = v[i].imag();
  }
  return out;
}

// Constant ACS on R^4 whose lower-left block is exactly zero: with
// s = [[0,-1],[1,0]] and b anti-commuting with s, [[s,b],[0,s]] squares to -I.
Mat degenerate_acs4() {
  Mat j(4, 4);
  j(0, 1) = -1.0;
  j(1, 0) = 1.0;
  j(2, 3) = -1.0;
  j(3, 2) = 1.0;
  j(0, 2) = 1.0;
  j(1, 3) = -1.0;
  return j;
}

}  // namespace

TEST_CASE("frame matrix conjugates the structure value to standard form") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-0.4, 0.4);
  for (int n : {1, 2}) {
    auto J = seeded(n, 0.06, 40 + n);
    for (int trial = 0; trial < 3; ++trial) {
      Vec p(2 * n);
      for (auto& x : p) x = U(rng);
      Mat P = frame_matrix(J, p);
      Mat conj = inverse(P) * J.value(p) * P;
      REQUIRE(op_norm(conj - j_standard(n)) < 1e-12);
    }
  }
}

TEST_CASE("normalization map inverts its own forward evaluation") {
  auto J = seeded(2, 0.05, 17);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  for (int trial = 0; trial < 6; ++trial) {
    Vec q(4);
    for (auto& x : q) x = U(rng);
    Vec w = detail::phi_apply(J, q);
    Vec back = detail::phi_invert(J, w);
    for (int i = 0; i < 4; ++i) REQUIRE(back[i] == Catch::Approx(q[i]).margin(1e-10));
  }
}

TEST_CASE("normalization map fixes the flat slice pointwise") {
  auto J = seeded(2, 0.05, 18);
  Vec q{0.3, -0.2, 0.0, 0.0};
  Vec w = detail::phi_apply(J, q);
  for (int i = 0; i < 4; ++i) REQUIRE(w[i] == q[i]);
}

TEST_CASE("normalization derivative matches central differences") {
  auto J = seeded(2, 0.05, 19);
  Vec q{0.2, -0.1, 0.15, 0.25};
  Mat d = detail::phi_derivative(J, q);
  double h = 1e-5;
  for (int k = 0; k < 4; ++k) {
    Vec a = q, b = q;
    a[k] += h;
    b[k] -= h;
    Vec fa = detail::phi_apply(J, a);
    Vec fb = detail::phi_apply(J, b);
    for (int i = 0; i < 4; ++i) {
      double fd = (fa[i] - fb[i]) / (2 * h);
      REQUIRE(d(i, k) == Catch::Approx(fd).margin(2e-7));
    }
  }
}

TEST_CASE("normalized structure is the exact sandwich by the map derivative") {
  auto J = seeded(1, 0.08, 20);
  auto N = structure_normalize(J);
  Vec q{0.3, 0.2};
  Vec w = detail::phi_apply(J, q);
  Mat d = detail::phi_derivative(J, q);
  Mat expected = d * J.value(q) * inverse(d);
  REQUIRE(op_norm(N.value(w) - expected) < 1e-9);
  Mat sq = N.value(w) * N.value(w);
  REQUIRE(op_norm(sq + Mat::identity(2)) < 1e-9);
}

TEST_CASE("dilation by one is the identity and scaling is exact") {
  auto J = seeded(2, 0.05, 21);
  auto J1 = structure_dilate(J, 1.0);
  auto Jh = structure_dilate(J, 0.25);
  Vec w{0.4, -0.3, 0.2, 0.1};
  REQUIRE(op_norm(J1.value(w) - J.value(w)) == 0.0);
  REQUIRE(op_norm(Jh.value(w) - J.value(0.25 * w)) == 0.0);
  for (int k = 0; k < 4; ++k)
    REQUIRE(op_norm(Jh.derivative(w, k) - 0.25 * J.derivative(0.25 * w, k)) < 1e-14);
  REQUIRE_THROWS_AS(structure_dilate(J, 0.0), Error);
}

TEST_CASE("tamed chart on the standard structure is a pure translation") {
  int n = 2;
  auto J = structure_standard(n);
  Vec p{0.3, -0.1, 0.0, 0.0};
  auto chart = build_tamed_chart(J, p, epsilon_m(2));
  REQUIRE(chart.t == 1.0);
  REQUIRE(op_norm(chart.P - Mat::identity(2 * n)) == 0.0);
  Vec x{0.5, 0.2, 0.1, -0.2};
  Vec w = chart.forward(x);
  for (int i = 0; i < 2 * n; ++i) REQUIRE(w[i] == Catch::Approx(x[i] - p[i]).margin(1e-14));
  Vec v{1.0, 2.0, -1.0, 0.5};
  Vec pv = chart.push_tangent(p, v);
  for (int i = 0; i < 2 * n; ++i) REQUIRE(pv[i] == Catch::Approx(v[i]).margin(1e-14));
  REQUIRE(chart.measured_c == 0.0);
}

TEST_CASE("tamed chart pushforward meets the requested closeness bound") {
  int n = 2;
  auto J = seeded(n, 0.02, 22);
  Vec p{0.1, -0.05, 0.0, 0.0};
  double eps = epsilon_m(2);
  auto chart = build_tamed_chart(J, p, eps);
  REQUIRE(chart.epsilon == eps);
  REQUIRE(chart.measured_c1 <= eps);
  REQUIRE(std::abs(std::log2(chart.t) - std::round(std::log2(chart.t))) < 1e-12);

  DomainSpec ball = DomainSpec::ball(2 * n, 1.0, Vec(2 * n, 0.0));
  REQUIRE(c1_distance_to_standard(chart.pushforward, ball) <= eps + 1e-12);

  // slice flatness carries through the whole composition
  for (double x1 : {-0.5, 0.0, 0.7}) {
    Vec w{x1, 0.3 * x1, 0.0, 0.0};
    REQUIRE(op_norm(chart.pushforward.value(w) - j_standard(n)) < 1e-8);
  }

  REQUIRE(norm2(chart.forward(p)) < 1e-13);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-0.2, 0.2);
  for (int trial = 0; trial < 5; ++trial) {
    Vec x(2 * n);
    for (int i = 0; i < 2 * n; ++i) x[i] = p[i] + U(rng);
    Vec back = chart.inverse(chart.forward(x));
    for (int i = 0; i < 2 * n; ++i) REQUIRE(back[i] == Catch::Approx(x[i]).margin(1e-9));
  }
}

TEST_CASE("chart tangent pushforward matches finite differences of the map") {
  int n = 1;
  auto J = seeded(n, 0.05, 23);
  Vec p{0.2, 0.0};
  auto chart = build_tamed_chart(J, p, epsilon_m(1));
  Vec v{0.7, -0.4};
  Vec pv = chart.push_tangent(p, v);
  double h = 1e-6;
  Vec fwd = chart.forward(p + h * v);
  Vec bwd = chart.forward(p - h * v);
  for (int i = 0; i < 2 * n; ++i)
    REQUIRE(pv[i] == Catch::Approx((fwd[i] - bwd[i]) / (2 * h)).margin(1e-5));
}

TEST_CASE("chart construction rejects bad inputs") {
  auto J = structure_standard(2);
  Vec off_slice{0.1, 0.0, 0.2, 0.0};
  REQUIRE_THROWS_MATCHES(build_tamed_chart(J, off_slice, 0.01), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.kind() == ErrorKind::PreconditionFailed;
                         }));
  Vec p(4, 0.0);
  REQUIRE_THROWS_MATCHES(build_tamed_chart(J, p, -1.0), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.kind() == ErrorKind::NonPositive; }));
}

TEST_CASE("unattainable tolerance reports the taming failure") {
  auto J = seeded(2, 0.05, 24);
  Vec p(4, 0.0);
  TamedChartOptions opt;
  opt.t_floor = 1.0;  // forbid shrinking, tolerance below the raw distance
  REQUIRE_THROWS_MATCHES(build_tamed_chart(J, p, 1e-14, opt), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.kind() == ErrorKind::CannotTame; }));
}

TEST_CASE("degenerate block structure is reported as singular") {
  auto J = structure_constant(2, degenerate_acs4());
  REQUIRE(op_norm(J.value(Vec(4, 0.0)) * J.value(Vec(4, 0.0)) + Mat::identity(4)) == 0.0);
  Vec w(4, 0.1);
  REQUIRE_THROWS_MATCHES(q_coefficient(J, w), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.kind() == ErrorKind::SingularLeadingMatrix;
                         }));
  Vec p(4, 0.0);
  REQUIRE_THROWS_MATCHES(build_tamed_chart(J, p, 0.01), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.kind() == ErrorKind::SingularMatrix;
                         }));
}

TEST_CASE("standard structure has a vanishing deformation coefficient") {
  for (int n : {1, 2}) {
    auto J = structure_standard(n);
    Vec w(2 * n, 0.2);
    REQUIRE(q_coefficient(J, w).max_abs() < 1e-14);
  }
}

TEST_CASE("raw block system agrees with the complex coefficient") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  int n = 2;
  for (int rep = 0; rep < 5; ++rep) {
    auto J = seeded(n, 0.05, 100 + rep);
    Vec w(2 * n);
    for (auto& x : w) x = 0.3 * U(rng);
    Mat Mz, Mzbar;
    q_raw_system(J, w, Mz, Mzbar);
    CMat Q = q_coefficient(J, w);
    CVec d(n), db(n);
    for (int i = 0; i < n; ++i) {
      d[i] = {U(rng), U(rng)};
      db[i] = {U(rng), U(rng)};
    }
    CVec cd(n);
    for (int i = 0; i < n; ++i) cd[i] = std::conj(d[i]);
    CVec qcd = Q * cd;
    CVec sum(n);
    for (int i = 0; i < n; ++i) sum[i] = db[i] + qcd[i];

    // the raw pair annihilates (db, d) exactly when db = -Q conj(d)
    Vec lhs = Mzbar * ri(db) + Mz * ri(d);
    Vec rhs = Mzbar * ri(sum);
    for (int i = 0; i < 2 * n; ++i) REQUIRE(lhs[i] == Catch::Approx(rhs[i]).margin(1e-12));
  }
}

TEST_CASE("chart coefficient overload evaluates the pushforward structure") {
  auto J = seeded(1, 0.04, 25);
  Vec p{0.1, 0.0};
  auto chart = build_tamed_chart(J, p, epsilon_m(1));
  Vec w{0.3, 0.2};
  CMat a = q_coefficient(chart, w);
  CMat b = q_coefficient(chart.pushforward, w);
  REQUIRE((a - b).max_abs() == 0.0);
  // small coefficient: the chart was built to keep the structure near standard
  REQUIRE(a.max_abs() < 0.1);
}

TEST_CASE("tangent lift squares to minus the identity") {
  auto J = seeded(2, 0.05, 26);
  auto lift = tangent_lift(J);
  REQUIRE(lift.lifted.n == 4);
  REQUIRE(lift.lifted.regularity == Catch::Approx(J.regularity - 1.0));
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  for (int trial = 0; trial < 4; ++trial) {
    Vec xi(8);
    for (auto& x : xi) x = U(rng);
    Mat jc = lift.lifted.value(xi);
    REQUIRE(op_norm(jc * jc + Mat::identity(8)) < 1e-10);
  }
}

TEST_CASE("lifted normalization projects onto the base normalization") {
  auto J = seeded(2, 0.05, 27);
  auto lift = tangent_lift(J);
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  int n = J.n;
  for (int trial = 0; trial < 4; ++trial) {
    Vec xi(4 * n);
    for (auto& x : xi) x = U(rng);
    Vec q(2 * n);
    for (int i = 0; i < n; ++i) {
      q[i] = xi[i];
      q[n + i] = xi[2 * n + i];
    }
    Vec up = lift.phi_c(xi);
    Vec down = lift.phi_base(q);
    for (int i = 0; i < n; ++i) {
      REQUIRE(up[i] == Catch::Approx(down[i]).margin(1e-12));
      REQUIRE(up[2 * n + i] == Catch::Approx(down[n + i]).margin(1e-12));
    }
  }
}

TEST_CASE("lifting commutes with constant linear base changes") {
  int n = 1;
  auto J = seeded(n, 0.05, 28);
  Mat P(2, 2);
  P(0, 0) = 1.2;
  P(0, 1) = 0.3;
  P(1, 0) = -0.1;
  P(1, 1) = 0.9;
  auto K = pushforward_linear(J, P);
  Mat L = lift_matrix(P);
  auto liftJ = tangent_lift(J);
  auto liftK = tangent_lift(K);
  Mat Linv = inverse(L);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(-0.4, 0.4);
  for (int trial = 0; trial < 3; ++trial) {
    Vec xi(4 * n);
    for (auto& x : xi) x = U(rng);
    Mat lhs = liftK.lifted.value(xi);
    Mat rhs = Linv * liftJ.lifted.value(L * xi) * L;
    REQUIRE(op_norm(lhs - rhs) < 1e-8);
  }
}

TEST_CASE("lift refuses a structure without derivative access") {
  StructureField J;
  J.n = 1;
  J.allow_fd = false;
  J.value_fn = [](const Vec&) { return j_standard(1); };
  REQUIRE_THROWS_MATCHES(tangent_lift(J), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.kind() == ErrorKind::NoDerivatives; }));
}
