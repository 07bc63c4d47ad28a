// Command-line driver. Every subcommand reads a JSON scene, runs one library
// operation, and prints key=value lines; reports go to --out as JSON and
// --check replays a saved report against a fresh computation.
//
// Exit codes: 0 success, 2 precondition or certification failure,
// 1 internal error, 64 usage or malformed input.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "acdisc/scene.hpp"

namespace {

using nlohmann::json;

struct CommonOpts {
  std::string scene_path, out_path, check_path;
  double tol = 0;
  double grid = 0;
  std::uint64_t seed = 0;
  int jobs = 0;
  bool have_seed = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_scene = true) {
  auto* s = cmd->add_option("--scene", o.scene_path, "scene JSON file");
  if (needs_scene) s->required();
  cmd->add_option("--out", o.out_path, "output file or directory");
  cmd->add_option("--check", o.check_path, "saved report to compare against");
  cmd->add_option("--tol", o.tol, "tolerance override");
  cmd->add_option("--grid", o.grid, "grid parameter (resolution or cell size)");
  cmd->add_option("--jobs", o.jobs, "worker count for scans");
  cmd->add_option("--seed", o.seed, "seed override")->each([&](const std::string&) {
    o.have_seed = true;
  });
}

void emit(const char* key, const std::string& val) { std::printf("%s=%s\n", key, val.c_str()); }
void emit(const char* key, double val) { std::printf("%s=%.12g\n", key, val); }
void emit(const char* key, int val) { std::printf("%s=%d\n", key, val); }

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  acdisc::require(out.good(), acdisc::ErrorKind::BadInput, "cannot write " + path);
  out << j.dump(2) << "\n";
}

// Fresh report vs a saved one; tolerant numeric comparison.
int run_check(const json& fresh, const std::string& path, double tol) {
  std::ifstream in(path);
  acdisc::require(in.good(), acdisc::ErrorKind::BadInput, "cannot open " + path);
  json saved;
  in >> saved;
  std::string why;
  bool ok = acdisc::json_close(fresh, saved, tol > 0 ? tol : 1e-9, &why);
  emit("check", ok ? 1 : 0);
  if (!ok) {
    emit("check_detail", why);
    return 2;
  }
  return 0;
}

acdisc::Lambda0Options lambda0_opts(const CommonOpts& o) {
  acdisc::Lambda0Options lo;
  if (o.tol > 0) lo.step_tol = o.tol;
  if (o.jobs > 0) lo.jobs = o.jobs;
  return lo;
}

int cmd_validate(const CommonOpts& o) {
  auto sc = acdisc::load_scene_file(o.scene_path);
  emit("n", sc.n);
  emit("has_structure", sc.J ? 1 : 0);
  emit("has_field", sc.u ? 1 : 0);
  emit("has_domain", sc.domain ? 1 : 0);
  if (sc.J) {
    // spot involution check on a handful of points
    double worst = 0;
    acdisc::DomainSpec D = sc.domain ? *sc.domain : acdisc::DomainSpec::ball(2 * sc.n);
    auto pts = acdisc::detail::with_resolution(D, 3).samples();
    for (auto& x : pts) {
      acdisc::Mat j = sc.J->value(x);
      worst = std::max(worst, acdisc::op_norm(j * j + acdisc::Mat::identity(2 * sc.n)));
    }
    emit("involution_defect", worst);
    acdisc::require(worst <= 1e-8, acdisc::ErrorKind::PreconditionFailed,
                    "structure is not an almost complex structure");
  }
  emit("ok", 1);
  return 0;
}

int cmd_levi(const CommonOpts& o) {
  auto sc = acdisc::load_scene_file(o.scene_path);
  acdisc::require(sc.J && sc.u && !sc.point.empty(), acdisc::ErrorKind::BadInput,
                  "levi needs structure, field, and point");
  auto ev = acdisc::levi_matrix(*sc.J, *sc.u, sc.point);
  emit("min_eig", ev.min_eig);
  emit("max_eig", ev.max_eig);
  if (!sc.direction.empty()) {
    acdisc::Vec mx = ev.matrix * sc.direction;
    double q = 0;
    for (std::size_t i = 0; i < mx.size(); ++i) q += sc.direction[i] * mx[i];
    emit("value", q);
  }
  return 0;
}

int cmd_lambda0(const CommonOpts& o) {
  auto sc = acdisc::load_scene_file(o.scene_path);
  acdisc::require(sc.J && sc.u && sc.domain, acdisc::ErrorKind::BadInput,
                  "lambda0 needs structure, field, and domain");
  acdisc::DomainSpec D = *sc.domain;
  if (o.grid >= 2) D.resolution = static_cast<int>(o.grid);
  auto r = acdisc::lambda0(*sc.J, *sc.u, D, lambda0_opts(o));
  std::printf("lambda0=%.6f\n", r.value);
  emit("value", r.value);
  emit("grid_min", r.grid_min);
  emit("evaluations", r.evaluations);
  emit("refined", r.refined ? 1 : 0);
  json rep = acdisc::lambda0_json(r);
  if (!o.out_path.empty()) write_json(o.out_path, rep);
  if (!o.check_path.empty()) return run_check(rep, o.check_path, o.tol);
  return 0;
}

int cmd_psh_build(const CommonOpts& o) {
  auto sc = acdisc::load_scene_file(o.scene_path);
  acdisc::require(sc.J && sc.domain, acdisc::ErrorKind::BadInput,
                  "psh-build needs structure and domain");
  acdisc::PshBuilderParams prm;
  if (sc.raw.contains("barrier")) {
    const auto& b = sc.raw["barrier"];
    prm.p = b.contains("center") ? b["center"].get<acdisc::Vec>()
                                 : acdisc::Vec(sc.domain->dim(), 0.0);
    prm.r = b.value("r", prm.r);
    prm.A = b.value("A", prm.A);
    prm.B = b.value("B", prm.B);
    prm.excluded_radius = b.value("excluded_radius", prm.excluded_radius);
  } else {
    prm.p = acdisc::Vec(sc.domain->dim(), 0.0);
  }
  auto out = acdisc::psh_log_builder(*sc.J, *sc.domain, prm, lambda0_opts(o));
  emit("k", out.k);
  emit("lambda0", out.certificate.lambda0.value);
  emit("excluded_radius", out.certificate.excluded_radius);
  emit("certified", out.certificate.certified ? 1 : 0);
  json rep{{"k", out.k},
           {"certified", out.certificate.certified},
           {"excluded_radius", out.certificate.excluded_radius},
           {"lambda0", acdisc::lambda0_json(out.certificate.lambda0)},
           {"constants_hash", acdisc::hash_hex(acdisc::constants().hash())}};
  if (!o.out_path.empty()) write_json(o.out_path, rep);
  if (!o.check_path.empty()) return run_check(rep, o.check_path, o.tol);
  return 0;
}

int cmd_chart(const CommonOpts& o) {
  auto sc = acdisc::load_scene_file(o.scene_path);
  acdisc::require(sc.J && !sc.point.empty(), acdisc::ErrorKind::BadInput,
                  "chart needs structure and point");
  double eps = o.tol > 0 ? o.tol : acdisc::epsilon_m(2.0);
  auto chart = acdisc::build_tamed_chart(*sc.J, sc.point, eps);
  emit("t", chart.t);
  emit("epsilon", chart.epsilon);
  emit("measured_c1", chart.measured_c1);
  emit("measured_c", chart.measured_c);
  json rep{{"t", chart.t},
           {"epsilon", chart.epsilon},
           {"measured_c1", chart.measured_c1},
           {"measured_c", chart.measured_c},
           {"p", chart.p}};
  if (!o.out_path.empty()) write_json(o.out_path, rep);
  if (!o.check_path.empty()) return run_check(rep, o.check_path, o.tol);
  return 0;
}

acdisc::DiscOperators make_ops(double grid_h) {
  auto grid = std::make_shared<const acdisc::DiscGrid>(
      acdisc::make_disc_grid(grid_h > 0 ? grid_h : 1.0 / 32));
  return acdisc::DiscOperators(grid);
}

int cmd_solve_disc(const CommonOpts& o, bool attach) {
  auto sc = acdisc::load_scene_file(o.scene_path);
  acdisc::require(sc.J && !sc.point.empty() && !sc.direction.empty(), acdisc::ErrorKind::BadInput,
                  "disc solve needs structure, point, and direction");
  double h = o.grid;
  acdisc::SolveOptions sopt;
  if (o.tol > 0) sopt.tol = o.tol;
  if (sc.raw.contains("disc")) {
    const auto& d = sc.raw["disc"];
    if (h <= 0) h = d.value("grid_h", 0.0);
    sopt.tol = d.value("tol", sopt.tol);
    sopt.max_iter = d.value("max_iter", sopt.max_iter);
  }
  auto ops = make_ops(h);
  auto Q = acdisc::coefficient_from_structure(*sc.J);
  acdisc::DiscSolution sol =
      attach ? acdisc::solve_attached_disc(Q, sc.point, sc.direction, ops, sopt)
             : acdisc::solve_disc(Q, sc.point, sc.direction, ops, sopt);
  if (attach) sol = acdisc::reflect_extend(sol, Q, ops);
  emit("residual", sol.residual);
  emit("residual_fd", sol.residual_fd);
  emit("band_residual", sol.band_residual);
  emit("off_band_residual", sol.off_band_residual);
  emit("iterations", sol.iterations);
  emit("converged", sol.converged ? 1 : 0);
  if (attach) {
    emit("diameter_imag_sup", sol.diameter_imag_sup);
    emit("reflected", sol.reflected ? 1 : 0);
  }
  if (!o.out_path.empty()) {
    std::ofstream csv(o.out_path + ".csv");
    acdisc::require(csv.good(), acdisc::ErrorKind::BadInput, "cannot write " + o.out_path + ".csv");
    acdisc::write_disc_csv(csv, sol);
    write_json(o.out_path + ".json", acdisc::disc_meta_json(sol));
    emit("csv", o.out_path + ".csv");
    emit("json", o.out_path + ".json");
  }
  if (!o.check_path.empty()) return run_check(acdisc::disc_meta_json(sol), o.check_path, o.tol);
  return 0;
}

int cmd_kobayashi(const CommonOpts& o, const std::string& mode_flag, bool want_upper) {
  auto sc = acdisc::load_scene_file(o.scene_path);
  acdisc::require(sc.J && sc.u && sc.domain && !sc.point.empty() && !sc.direction.empty(),
                  acdisc::ErrorKind::BadInput,
                  "kobayashi needs structure, field, domain, point, and direction");
  std::string mode = mode_flag;
  if (mode.empty()) mode = sc.raw.value("mode", "interior");
  acdisc::KobayashiOptions kopt;
  kopt.lambda0 = lambda0_opts(o);
  if (sc.raw.contains("m")) kopt.m = sc.raw["m"].get<double>();

  acdisc::BoundReport rep;
  if (mode == "basepoint") {
    rep = acdisc::lower_bound_basepoint(*sc.J, *sc.domain, *sc.u, sc.point, sc.direction, kopt);
  } else if (mode == "chart") {
    double eps = acdisc::epsilon_m(2.0);
    auto chart = acdisc::build_tamed_chart(*sc.J, sc.point, eps);
    rep = acdisc::lower_bound_chart(*sc.J, chart, *sc.domain, *sc.u, sc.point, sc.direction, kopt);
  } else {
    acdisc::require(mode == "interior", acdisc::ErrorKind::BadInput,
                    "mode must be basepoint, interior, or chart");
    rep = acdisc::lower_bound(*sc.J, *sc.domain, *sc.u, sc.point, sc.direction, kopt);
  }

  if (want_upper) {
    auto ops = make_ops(o.grid);
    auto Q = acdisc::coefficient_from_structure(*sc.J);
    acdisc::SolveOptions sopt;
    if (o.tol > 0) sopt.tol = o.tol;
    auto ub = acdisc::upper_bound(Q, *sc.domain, sc.point, sc.direction, ops, {}, sopt);
    if (ub.feasible) rep.upper = ub.value;
    emit("upper_feasible", ub.feasible ? 1 : 0);
    emit("upper_attempted", ub.attempted);
    if (ub.feasible) {
      emit("upper", ub.value);
      emit("best_alpha", ub.best_alpha);
    }
  }

  emit("provenance", rep.provenance);
  emit("lower", rep.lower);
  emit("lambda0", rep.lambda0_used);
  emit("c_prime", rep.c_prime);
  emit("c_m", rep.c_m_used);
  emit("t", rep.t);
  emit("epsilon", rep.epsilon_used);
  emit("constants_hash", acdisc::hash_hex(rep.constants_hash));
  json jr = acdisc::bound_report_json(rep);
  if (!o.out_path.empty()) write_json(o.out_path, jr);
  if (!o.check_path.empty()) return run_check(jr, o.check_path, o.tol);
  return 0;
}

int cmd_study(const CommonOpts& o) {
  auto sc = acdisc::load_scene_file(o.scene_path);
  json spec = sc.raw.contains("study") ? sc.raw["study"] : sc.raw;
  acdisc::ExperimentConfig cfg = acdisc::parse_experiment(spec);
  if (o.have_seed) cfg.seed = o.seed;
  if (o.grid > 0 && o.grid < 1) cfg.grid_h = o.grid;
  if (o.tol > 0) cfg.tol = o.tol;
  if (!o.out_path.empty()) cfg.out_dir = o.out_path;
  auto rep = acdisc::theorem_scaling_study(cfg);
  emit("rows", static_cast<int>(rep.rows.size()));
  emit("records", static_cast<int>(rep.records.size()));
  emit("all_passed", rep.all_passed ? 1 : 0);
  emit("monotone_ok", rep.monotone_ok ? 1 : 0);
  emit("lambda_fit", rep.lambda_fit);
  emit("fitted_cK", rep.fitted_cK);
  emit("failures", static_cast<int>(rep.failures.size()));
  if (!rep.csv_path.empty()) {
    emit("csv", rep.csv_path);
    emit("json", rep.json_path);
  }
  return rep.all_passed ? 0 : 2;
}

int cmd_constants(const CommonOpts& o) {
  const auto& c = acdisc::constants();
  emit("theta", c.theta);
  emit("k", c.k);
  emit("c_prime", c.c_prime);
  emit("c_double_prime", c.c_double_prime);
  emit("c_tilde_effective", c.c_tilde_effective);
  emit("constants_hash", acdisc::hash_hex(c.hash()));
  json rep = acdisc::constants_json();
  if (!o.out_path.empty()) write_json(o.out_path, rep);
  if (!o.check_path.empty()) return run_check(rep, o.check_path, o.tol);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical toolkit for almost complex discs and metric bounds"};
  app.require_subcommand(1);

  CommonOpts validate_o, levi_o, lambda0_o, psh_o, chart_o, solve_o, attach_o, kob_o, study_o,
      const_o;
  std::string kob_mode;
  bool kob_upper = false;

  add_common(app.add_subcommand("validate", "parse a scene and sanity check it"), validate_o);
  add_common(app.add_subcommand("levi", "evaluate the structure Levi form at a point"), levi_o);
  add_common(app.add_subcommand("lambda0", "certified minimum Levi eigenvalue over a domain"),
             lambda0_o);
  add_common(app.add_subcommand("psh-build", "build a log barrier and certify strictness"), psh_o);
  add_common(app.add_subcommand("chart", "build a tamed chart at a point"), chart_o);
  add_common(app.add_subcommand("solve-disc", "solve the disc equation for a scene"), solve_o);
  add_common(app.add_subcommand("attach", "solve an attached disc and reflect it"), attach_o);
  auto* kob = app.add_subcommand("kobayashi", "metric lower bound (and optional upper bound)");
  add_common(kob, kob_o);
  kob->add_option("--mode", kob_mode, "basepoint, interior, or chart");
  kob->add_flag("--upper", kob_upper, "also search for a disc upper bound");
  add_common(app.add_subcommand("study", "amplitude sweep with deterministic reports"), study_o);
  add_common(app.add_subcommand("constants", "print the constants manifest"), const_o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 64;
  }

  try {
    if (app.got_subcommand("validate")) return cmd_validate(validate_o);
    if (app.got_subcommand("levi")) return cmd_levi(levi_o);
    if (app.got_subcommand("lambda0")) return cmd_lambda0(lambda0_o);
    if (app.got_subcommand("psh-build")) return cmd_psh_build(psh_o);
    if (app.got_subcommand("chart")) return cmd_chart(chart_o);
    if (app.got_subcommand("solve-disc")) return cmd_solve_disc(solve_o, false);
    if (app.got_subcommand("attach")) return cmd_solve_disc(attach_o, true);
    if (app.got_subcommand("kobayashi")) return cmd_kobayashi(kob_o, kob_mode, kob_upper);
    if (app.got_subcommand("study")) return cmd_study(study_o);
    if (app.got_subcommand("constants")) return cmd_constants(const_o);
  } catch (const acdisc::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    if (e.kind() == acdisc::ErrorKind::BadInput) return 64;
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
  return 64;
}
