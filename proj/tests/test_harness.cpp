#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include "acdisc/harness.hpp"
#include "oracles.hpp"

using namespace acdisc;

namespace {

std::shared_ptr<const DiscGrid> grid16() {
  static auto g = std::make_shared<DiscGrid>(make_disc_grid(1.0 / 16));
  return g;
}

std::vector<double> lower_bump(const DiscGrid& G) {
  return poisson_extension(G, [](double th) { return std::max(0.0, -std::sin(th)); });
}

DiscSolution linear_disc(const DiscOperators& ops) {
  return solve_attached_disc(zero_coefficient(1), Vec{0.0, 0.0}, Vec{1.0, 0.0}, ops);
}

}  // namespace

TEST_CASE("harmonic extension of lower-arc data is nonnegative and flat on top") {
  auto G = grid16();
  auto phi = lower_bump(*G);
  double minv = 0;
  for (double v : phi) minv = std::min(minv, v);
  REQUIRE(minv >= 0.0);
  // the quadrature kernel overshoots at lattice nodes hugging the rim, where the
  // node-to-rim distance drops below the ring spacing; the max principle is only
  // asserted away from that boundary layer
  double interior_max = 0;
  for (std::size_t k = 0; k < G->lattice_count; ++k)
    if (std::abs(G->nodes[k]) <= 0.9) interior_max = std::max(interior_max, phi[k]);
  REQUIRE(interior_max <= 1.0 + 1e-12);
  for (std::size_t k = G->lattice_count; k < G->size(); ++k)
    if (G->nodes[k].imag() > 1e-15) REQUIRE(phi[k] == 0.0);
  // value at the center of a harmonic function is the boundary mean = 1/pi
  int orig = G->origin;
  REQUIRE(phi[orig] == Catch::Approx(1.0 / M_PI).margin(0.02));
}

TEST_CASE("sector growth bound holds and recomputes from the arc integral") {
  auto G = grid16();
  auto phi = lower_bump(*G);
  double alpha = 0.5;
  std::vector<std::complex<double>> samples{{0.0, 0.4}, {0.1, 0.3}, {-0.2, 0.5}};
  auto recs = sector_mean_check(*G, phi, alpha, samples);
  REQUIRE(recs.size() == samples.size());

  double arc = 0;
  for (std::size_t k = G->lattice_count; k < G->size(); ++k)
    if (G->nodes[k].imag() < -1e-15) arc += G->arc_weights[k] * phi[k];
  REQUIRE(arc == Catch::Approx(2.0).epsilon(0.01));  // integral of |sin| over the lower arc

  double sin2 = std::sin(alpha) * std::sin(alpha);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    REQUIRE(recs[i].passed);
    REQUIRE(recs[i].name == "sector_mean");
    double r = std::abs(samples[i]);
    REQUIRE(recs[i].rhs == Catch::Approx((arc / M_PI) * (1.0 - r) / sin2).epsilon(1e-12));
    REQUIRE(recs[i].margin == Catch::Approx(recs[i].rhs - recs[i].lhs).margin(1e-15));
    REQUIRE(recs[i].lhs >= 0.0);
  }
}

TEST_CASE("sector check rejects data violating its hypotheses") {
  auto G = grid16();
  std::vector<std::complex<double>> samples{{0.0, 0.4}};

  std::vector<double> neg(G->size(), -1.0);
  REQUIRE_THROWS_MATCHES(sector_mean_check(*G, neg, 0.5, samples), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.kind() == ErrorKind::PreconditionFailed;
                         }));

  std::vector<double> ones(G->size(), 1.0);  // does not vanish on the upper arc
  REQUIRE_THROWS_MATCHES(sector_mean_check(*G, ones, 0.5, samples), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.kind() == ErrorKind::PreconditionFailed;
                         }));

  auto phi = lower_bump(*G);
  std::vector<std::complex<double>> outside{{0.9, 0.05}};  // argument below alpha
  REQUIRE_THROWS_MATCHES(sector_mean_check(*G, phi, 0.5, outside), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.kind() == ErrorKind::PreconditionFailed;
                         }));

  REQUIRE_THROWS_MATCHES(sector_mean_check(*G, phi, 2.0, samples), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.kind() == ErrorKind::BadInput; }));
}

TEST_CASE("differential bound controls the linear attached disc") {
  auto G = grid16();
  DiscOperators ops(G);
  auto sol = linear_disc(ops);
  auto ext = reflect_extend(sol, zero_coefficient(1), ops);
  auto J = structure_standard(1);
  auto rho = field_sum_y_squared(1);

  std::vector<std::complex<double>> samples{{0.25, 0.25}, {-0.125, 0.5}, {0.0, -0.25}};
  auto recs = differential_bound_check(ext, J, rho, {0.0, 0.0}, samples);
  REQUIRE(recs.size() == samples.size());
  for (auto& r : recs) {
    REQUIRE(r.passed);
    // the disc is the identity: largest singular value of the differential is 1
    REQUIRE(r.lhs == Catch::Approx(1.0).margin(1e-6));
    REQUIRE(std::isinf(r.aux));  // 1/Im(a) normalization for a real diameter point
  }

  // complex diameter point gives the finite secondary normalization
  auto recs2 = differential_bound_check(ext, J, rho, {0.0, 0.3}, samples);
  for (std::size_t i = 0; i < recs2.size(); ++i) {
    REQUIRE(std::isfinite(recs2[i].aux));
    // prim = 1/(1-0.3), aux = 1/0.3, same scale factor
    REQUIRE(recs2[i].aux == Catch::Approx(recs2[i].rhs * (1.0 - 0.3) / 0.3).epsilon(1e-9));
  }

  // recompute the primary bound: c'' sqrt(arc/lambda) / sqrt(1-|zeta|)
  double arc = 0;
  auto& ring_start = G->lattice_count;
  for (std::size_t k = ring_start; k < G->size(); ++k) {
    double y = G->nodes[k].imag();
    arc += G->arc_weights[k] * y * y;
  }
  double lam = 2.0;  // Levi floor of sum y^2 under the standard structure
  for (std::size_t i = 0; i < recs.size(); ++i) {
    double rim = 1.0 - std::abs(samples[i]);
    double expect = constants().c_double_prime * std::sqrt(arc / lam) / std::sqrt(rim);
    REQUIRE(recs[i].rhs == Catch::Approx(expect).epsilon(1e-6));
  }
}

TEST_CASE("differential bound enforces attachment to the zero set") {
  auto G = grid16();
  DiscOperators ops(G);
  auto J = structure_standard(1);
  auto rho = field_sum_y_squared(1);
  // a disc whose diameter sits at height y = 0.5 violates {rho = 0}
  auto lifted = solve_disc(zero_coefficient(1), Vec{0.0, 0.5}, Vec{1.0, 0.0}, ops);
  std::vector<std::complex<double>> samples{{0.25, 0.25}};
  REQUIRE_THROWS_MATCHES(differential_bound_check(lifted, J, rho, {0.0, 0.0}, samples), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.kind() == ErrorKind::PreconditionFailed;
                         }));

  auto sol = linear_disc(ops);
  REQUIRE_THROWS_MATCHES(differential_bound_check(sol, J, rho, {1.5, 0.0}, samples), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.kind() == ErrorKind::BadInput; }));

  std::vector<std::complex<double>> on_rim{{1.0, 0.0}};
  REQUIRE_THROWS_MATCHES(differential_bound_check(sol, J, rho, {0.0, 0.0}, on_rim), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.kind() == ErrorKind::PreconditionFailed;
                         }));
}

TEST_CASE("half holder record matches its formula on the identity disc") {
  auto G = grid16();
  DiscOperators ops(G);
  auto sol = linear_disc(ops);
  auto ext = reflect_extend(sol, zero_coefficient(1), ops);
  auto J = structure_standard(1);
  RegionSpec K{{0.0, 0.0}, 0.5, 0.0};

  auto rec = half_holder_check(ext, J, 0.0, K);
  REQUIRE(rec.passed);
  REQUIRE(rec.name == "half_holder");
  // sup of |zeta| over the closed disc is 1; curvature floor of sum y^2 is 2
  double sup = 1.0;
  REQUIRE(rec.rhs == Catch::Approx(constants().c_tilde_effective * sup / std::sqrt(2.0))
                         .epsilon(1e-6));
  REQUIRE(rec.aux == Catch::Approx(sup / std::sqrt(2.0)).epsilon(1e-6));

  HalfHolderOptions opts;
  opts.lambda_hint = 2.0;
  opts.sup_override = 5.0;
  auto rec2 = half_holder_check(ext, J, 0.0, K, opts);
  REQUIRE(rec2.rhs == Catch::Approx(5.0 * constants().c_tilde_effective / std::sqrt(2.0))
                          .epsilon(1e-12));
}

TEST_CASE("bootstrap ratio is reproducible and certifies itself") {
  auto G = grid16();
  DiscOperators ops(G);
  auto sol = linear_disc(ops);
  auto ext = reflect_extend(sol, zero_coefficient(1), ops);
  RegionSpec K{{0.0, 0.0}, 0.5, 0.0};

  double ratio = bootstrap_ratio(ext, K, 0.5);
  REQUIRE(ratio > 0.0);
  REQUIRE(ratio == bootstrap_ratio(ext, K, 0.5));

  auto rec = bootstrap_check(ext, K, 0.5, ratio);
  REQUIRE(rec.passed);
  REQUIRE(rec.name == "bootstrap");

  DiscSolution broken = ext;
  broken.converged = false;
  REQUIRE_THROWS_MATCHES(bootstrap_check(broken, K, 0.5, ratio), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.kind() == ErrorKind::PreconditionFailed;
                         }));
  REQUIRE_THROWS_AS(bootstrap_ratio(ext, K, 1.5), Error);
}

TEST_CASE("scaling study runs green and deterministically on a small config") {
  ExperimentConfig cfg;
  cfg.n = 1;
  cfg.amplitudes = {0.0, 0.02};
  cfg.discs_per_amplitude = 2;
  cfg.grid_h = 1.0 / 16;
  cfg.seed = 20260816;

  auto rep = theorem_scaling_study(cfg);
  REQUIRE(rep.failures.empty());
  REQUIRE(rep.all_passed);
  REQUIRE(rep.monotone_ok);
  REQUIRE(rep.rows.size() == 4);
  for (auto& r : rep.rows) {
    REQUIRE(r.solved);
    REQUIRE(r.h_inf > 0.0);
    REQUIRE(r.residual <= cfg.tol);
  }
  REQUIRE(rep.lambda_E.size() == 2);
  REQUIRE(rep.lambda_E[0] == Catch::Approx(2.0).margin(1e-6));
  REQUIRE(rep.lambda_E[1] < rep.lambda_E[0]);
  REQUIRE(rep.lambda_E[1] > 0.0);
  REQUIRE(rep.records.size() == 12);  // three inequality rows per solved disc
  REQUIRE(rep.lambda_fit > 0.0);
  REQUIRE(rep.fitted_cK > 0.0);

  // byte-level determinism
  auto rep2 = theorem_scaling_study(cfg);
  REQUIRE(rep.csv_text == rep2.csv_text);
  REQUIRE(rep.json_text == rep2.json_text);

  // payload structure
  REQUIRE(rep.csv_text.rfind(
              "amplitude,disc,inequality,lhs,rhs,margin,passed,lambda_E,h_inf,residual,"
              "iterations\n",
              0) == 0);
  auto j = nlohmann::json::parse(rep.json_text);
  REQUIRE(j.at("constants_hash").get<std::string>().size() == 16);
  char hx[24];
  std::snprintf(hx, sizeof hx, "%016llx",
                static_cast<unsigned long long>(constants().hash()));
  REQUIRE(j.at("constants_hash").get<std::string>() == hx);
  REQUIRE(j.at("all_passed").get<bool>());
  REQUIRE(j.at("lambda_E").size() == 2);

  // a different seed moves the anchors, so the payload changes
  ExperimentConfig other = cfg;
  other.seed = 7;
  auto rep3 = theorem_scaling_study(other);
  REQUIRE(rep3.csv_text != rep.csv_text);
}

TEST_CASE("scaling study writes its three report files") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "acdisc_study_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  ExperimentConfig cfg;
  cfg.n = 1;
  cfg.amplitudes = {0.0};
  cfg.discs_per_amplitude = 1;
  cfg.grid_h = 1.0 / 16;
  cfg.out_dir = dir.string();
  cfg.write_dat = true;

  auto rep = theorem_scaling_study(cfg);
  REQUIRE(fs::exists(dir / "study.csv"));
  REQUIRE(fs::exists(dir / "study.json"));
  REQUIRE(fs::exists(dir / "scaling.dat"));

  std::ifstream csv(dir / "study.csv");
  std::string text((std::istreambuf_iterator<char>(csv)), std::istreambuf_iterator<char>());
  REQUIRE(text == rep.csv_text);
  fs::remove_all(dir);
}
