#pragma once

// JSON scene loading and report serialization for the command-line driver.
// A scene file names a structure, an optional scalar field and domain, and
// optional point/direction data; subcommands pick the parts they need.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "acdisc/charts.hpp"
#include "acdisc/constants.hpp"
#include "acdisc/disc_solver.hpp"
#include "acdisc/harness.hpp"
#include "acdisc/kobayashi.hpp"
#include "acdisc/levi.hpp"
#include "acdisc/scalar_field.hpp"
#include "acdisc/structure.hpp"

#include "json.hpp"

namespace acdisc {

inline Poly parse_poly(const nlohmann::json& spec, int nvars) {
  require(spec.is_array(), ErrorKind::BadInput, "polynomial spec must be an array of terms");
  Poly p(nvars);
  for (const auto& t : spec) {
    require(t.contains("c") && t.contains("pow"), ErrorKind::BadInput,
            "each term needs c and pow");
    std::vector<int> pw = t["pow"].get<std::vector<int>>();
    require(static_cast<int>(pw.size()) == nvars, ErrorKind::BadInput,
            "term exponent count must match the variable count");
    p.add_term(pw, t["c"].get<double>());
  }
  return p;
}

inline DomainSpec parse_domain(const nlohmann::json& d) {
  std::string shape = d.value("shape", "ball");
  int res = d.value("resolution", 0);
  if (shape == "ball") {
    int dim = d.at("dim").get<int>();
    double r = d.value("radius", 1.0);
    Vec c = d.contains("center") ? d["center"].get<Vec>() : Vec{};
    return DomainSpec::ball(dim, r, c, res);
  }
  require(shape == "box", ErrorKind::BadInput, "domain shape must be ball or box");
  return DomainSpec::box(d.at("lo").get<Vec>(), d.at("hi").get<Vec>(), res);
}

inline StructureField parse_structure(const nlohmann::json& s) {
  std::string kind = s.at("kind").get<std::string>();
  int n = s.at("n").get<int>();
  if (kind == "standard") return structure_standard(n);
  if (kind == "constant") {
    auto rows = s.at("matrix").get<std::vector<std::vector<double>>>();
    require(static_cast<int>(rows.size()) == 2 * n, ErrorKind::BadInput,
            "matrix must be 2n x 2n");
    Mat J(2 * n, 2 * n);
    for (int i = 0; i < 2 * n; ++i) {
      require(static_cast<int>(rows[i].size()) == 2 * n, ErrorKind::BadInput,
              "matrix must be 2n x 2n");
      for (int j = 0; j < 2 * n; ++j) J(i, j) = rows[i][j];
    }
    return structure_constant(n, J);
  }
  if (kind == "from_H_seeded") {
    double amp = s.value("amplitude", 0.0);
    std::uint64_t seed = s.value("seed", std::uint64_t{1});
    auto pattern = detail::perturbation_pattern(n, seed);
    return structure_from_H(n, detail::scaled_pattern(pattern, amp));
  }
  if (kind == "from_H") {
    PolyCMat H;
    H.n = n;
    const auto& re = s.at("re");
    const auto& im = s.at("im");
    require(re.size() == static_cast<std::size_t>(n) * n &&
                im.size() == static_cast<std::size_t>(n) * n,
            ErrorKind::BadInput, "from_H needs n*n re and im entries");
    for (int e = 0; e < n * n; ++e) {
      H.re.push_back(parse_poly(re[e], 2 * n));
      H.im.push_back(parse_poly(im[e], 2 * n));
    }
    return structure_from_H(n, std::move(H));
  }
  if (kind == "poly") {
    const auto& entries = s.at("entries");
    require(entries.size() == static_cast<std::size_t>(2 * n) * (2 * n), ErrorKind::BadInput,
            "poly structure needs (2n)^2 entries");
    std::vector<Poly> ps;
    ps.reserve(entries.size());
    for (const auto& e : entries) ps.push_back(parse_poly(e, 2 * n));
    return structure_from_poly(n, std::move(ps));
  }
  require(false, ErrorKind::BadInput, "unknown structure kind: " + kind);
  return {};
}

inline ScalarField parse_field(const nlohmann::json& f, int dim) {
  std::string kind = f.at("kind").get<std::string>();
  if (kind == "quadratic_radial") {
    Vec c = f.contains("center") ? f["center"].get<Vec>() : Vec(dim, 0.0);
    return field_quadratic_radial(dim, c, f.value("coeff", 1.0), f.value("offset", 0.0));
  }
  if (kind == "sum_y_squared") return field_sum_y_squared(dim / 2);
  if (kind == "log_barrier") {
    Vec c = f.contains("center") ? f["center"].get<Vec>() : Vec(dim, 0.0);
    return field_log_barrier(dim, c, f.at("r").get<double>(), f.at("A").get<double>(),
                             f.at("B").get<double>(), default_cutoff());
  }
  if (kind == "poly") return field_from_poly(parse_poly(f.at("terms"), dim));
  require(false, ErrorKind::BadInput, "unknown field kind: " + kind);
  return {};
}

struct Scene {
  nlohmann::json raw;
  int n = 0;
  std::optional<StructureField> J;
  std::optional<ScalarField> u;
  std::optional<DomainSpec> domain;
  Vec point, direction;
};

inline Scene parse_scene(const nlohmann::json& j) {
  Scene sc;
  sc.raw = j;
  if (j.contains("structure")) {
    nlohmann::json s = j["structure"];
    if (!s.contains("n") && j.contains("n")) s["n"] = j["n"];
    sc.J = parse_structure(s);
    sc.n = sc.J->n;
  } else if (j.contains("n")) {
    sc.n = j["n"].get<int>();
  }
  int dim = 2 * sc.n;
  if (j.contains("domain")) {
    sc.domain = parse_domain(j["domain"]);
    if (dim == 0) dim = sc.domain->dim();
  }
  if (j.contains("field")) {
    require(dim > 0, ErrorKind::BadInput, "field needs n or a domain for its dimension");
    sc.u = parse_field(j["field"], dim);
  }
  if (j.contains("point")) sc.point = j["point"].get<Vec>();
  if (j.contains("direction")) sc.direction = j["direction"].get<Vec>();
  return sc;
}

inline Scene load_scene_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::BadInput, "cannot open scene file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    require(false, ErrorKind::BadInput, std::string("scene parse error: ") + e.what());
  }
  return parse_scene(j);
}

inline ExperimentConfig parse_experiment(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.n = j.value("n", cfg.n);
  if (j.contains("amplitudes")) cfg.amplitudes = j["amplitudes"].get<std::vector<double>>();
  cfg.discs_per_amplitude = j.value("discs_per_amplitude", cfg.discs_per_amplitude);
  cfg.grid_h = j.value("grid_h", cfg.grid_h);
  cfg.anchor_radius = j.value("anchor_radius", cfg.anchor_radius);
  cfg.direction_scale = j.value("direction_scale", cfg.direction_scale);
  cfg.tol = j.value("tol", cfg.tol);
  cfg.max_iter = j.value("max_iter", cfg.max_iter);
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.write_dat = j.value("write_dat", cfg.write_dat);
  cfg.lambda0_resolution = j.value("lambda0_resolution", cfg.lambda0_resolution);
  if (j.contains("K")) {
    const auto& K = j["K"];
    cfg.K.center = {K.value("center_re", 0.0), K.value("center_im", 0.0)};
    cfg.K.radius = K.value("radius", cfg.K.radius);
    cfg.K.min_im = K.value("min_im", cfg.K.min_im);
  }
  return cfg;
}

// --- report serialization -------------------------------------------------

inline std::string hash_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline nlohmann::json lambda0_json(const Lambda0Result& r) {
  return {{"value", r.value},
          {"grid_min", r.grid_min},
          {"argmin_point", r.argmin_point},
          {"argmin_direction", r.argmin_direction},
          {"evaluations", r.evaluations},
          {"refined", r.refined}};
}

inline nlohmann::json constants_json() {
  const auto& c = constants();
  auto j = nlohmann::json::parse(c.canonical_json());
  j["hash"] = hash_hex(c.hash());
  return j;
}

inline nlohmann::json bound_report_json(const BoundReport& r) {
  nlohmann::json j{{"lower", r.lower},
                   {"lambda0", r.lambda0_used},
                   {"k", r.k},
                   {"c_prime", r.c_prime},
                   {"c_m", r.c_m_used},
                   {"t", r.t},
                   {"epsilon", r.epsilon_used},
                   {"constants_hash", hash_hex(r.constants_hash)},
                   {"p", r.p},
                   {"v", r.v},
                   {"provenance", r.provenance},
                   {"lambda0_detail", lambda0_json(r.lambda0_detail)}};
  if (r.upper) j["upper"] = *r.upper;
  j["epsilon_checks"] = {{"passed", r.epsilon_checks.passed},
                         {"c1_max", r.epsilon_checks.c1_max},
                         {"frame_norm_max", r.epsilon_checks.frame_norm_max},
                         {"frame_inv_norm_max", r.epsilon_checks.frame_inv_norm_max},
                         {"points_checked", r.epsilon_checks.points_checked}};
  return j;
}

inline nlohmann::json localization_json(const LocalizationReport& r) {
  return {{"N", r.N},
          {"s", r.s},
          {"dist", r.dist},
          {"c", r.c},
          {"radius", r.radius},
          {"deflation_margin", r.deflation_margin},
          {"barrier_r", r.barrier_r},
          {"constants_hash", hash_hex(r.constants_hash)}};
}

inline nlohmann::json upper_bound_json(const UpperBound& r) {
  nlohmann::json j{{"best_alpha", r.best_alpha},
                   {"attempted", r.attempted},
                   {"admissible", r.admissible},
                   {"feasible", r.feasible}};
  if (r.feasible) j["value"] = r.value;
  return j;
}

inline nlohmann::json disc_meta_json(const DiscSolution& sol) {
  return {{"n", sol.n},
          {"grid_h", sol.grid ? sol.grid->h : 0.0},
          {"nodes", sol.grid ? sol.grid->nodes.size() : 0},
          {"center", sol.center},
          {"direction", sol.direction},
          {"residual", sol.residual},
          {"residual_fd", sol.residual_fd},
          {"band_residual", sol.band_residual},
          {"off_band_residual", sol.off_band_residual},
          {"diameter_imag_sup", sol.diameter_imag_sup},
          {"iterations", sol.iterations},
          {"converged", sol.converged},
          {"attached", sol.attached},
          {"reflected", sol.reflected},
          {"constants_hash", hash_hex(constants().hash())}};
}

inline void write_disc_csv(std::ostream& out, const DiscSolution& sol) {
  require(sol.grid != nullptr, ErrorKind::BadInput, "solution carries no grid");
  const DiscGrid& G = *sol.grid;
  out << "k,i,j,x,y,weight,arc_weight,interior";
  for (int c = 0; c < sol.n; ++c)
    out << ",h" << c << "_re,h" << c << "_im,f" << c << "_re,f" << c << "_im,dh" << c
        << "_re,dh" << c << "_im";
  out << "\n";
  for (std::size_t k = 0; k < G.nodes.size(); ++k) {
    out << k << "," << G.ij[k].first << "," << G.ij[k].second << ","
        << detail::fmt_g(G.nodes[k].real()) << "," << detail::fmt_g(G.nodes[k].imag()) << ","
        << detail::fmt_g(G.weights[k]) << "," << detail::fmt_g(G.arc_weights[k]) << ","
        << int(G.interior[k]);
    for (int c = 0; c < sol.n; ++c) {
      out << "," << detail::fmt_g(sol.values[k][c].real()) << ","
          << detail::fmt_g(sol.values[k][c].imag()) << ","
          << detail::fmt_g(sol.density[k][c].real()) << ","
          << detail::fmt_g(sol.density[k][c].imag()) << ","
          << detail::fmt_g(sol.dzeta[k][c].real()) << "," << detail::fmt_g(sol.dzeta[k][c].imag());
    }
    out << "\n";
  }
}

// Recursive approximate comparison for --check report round-trips: numbers
// match within tol (relative for large values), everything else exactly.
inline bool json_close(const nlohmann::json& a, const nlohmann::json& b, double tol,
                       std::string* why = nullptr, const std::string& path = "$") {
  auto fail = [&](const std::string& msg) {
    if (why) *why = path + ": " + msg;
    return false;
  };
  if (a.is_number() && b.is_number()) {
    double x = a.get<double>(), y = b.get<double>();
    if (std::abs(x - y) <= tol * (1.0 + std::max(std::abs(x), std::abs(y)))) return true;
    return fail("numbers differ: " + a.dump() + " vs " + b.dump());
  }
  if (a.type() != b.type()) return fail("type mismatch");
  if (a.is_object()) {
    if (a.size() != b.size()) return fail("object size mismatch");
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (!b.contains(it.key())) return fail("missing key " + it.key());
      if (!json_close(it.value(), b[it.key()], tol, why, path + "." + it.key())) return false;
    }
    return true;
  }
  if (a.is_array()) {
    if (a.size() != b.size()) return fail("array size mismatch");
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!json_close(a[i], b[i], tol, why, path + "[" + std::to_string(i) + "]")) return false;
    return true;
  }
  if (a == b) return true;
  return fail("values differ: " + a.dump() + " vs " + b.dump());
}

}  // namespace acdisc
