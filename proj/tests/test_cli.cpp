#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;

  // key=value lines parsed into a map; later duplicates win
  std::map<std::string, std::string> kv() const {
    std::map<std::string, std::string> m;
    std::size_t pos = 0;
    while (pos < out.size()) {
      std::size_t eol = out.find('\n', pos);
      if (eol == std::string::npos) eol = out.size();
      std::string line = out.substr(pos, eol - pos);
      std::size_t eq = line.find('=');
      if (eq != std::string::npos) m[line.substr(0, eq)] = line.substr(eq + 1);
      pos = eol + 1;
    }
    return m;
  }

  std::string first_line() const {
    std::size_t eol = out.find('\n');
    return eol == std::string::npos ? out : out.substr(0, eol);
  }
};

std::string binary() {
  const char* b = std::getenv("ACDISC_BIN");
  REQUIRE(b != nullptr);
  return b;
}

RunResult run(const std::string& args) {
  RunResult r;
  std::string cmd = binary() + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int status = pclose(p);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

const fs::path& work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "acdisc_cli_cases";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_scene(const std::string& name, const std::string& text) {
  fs::path p = work_dir() / name;
  std::ofstream(p) << text;
  return p.string();
}

const char* kSceneModel = R"({
  "n": 1,
  "structure": {"kind": "standard", "n": 1},
  "field": {"kind": "quadratic_radial", "center": [0, 0], "offset": -1.0},
  "domain": {"shape": "ball", "dim": 2, "radius": 1.0},
  "point": [0, 0],
  "direction": [1, 0]
})";

const char* kScenePerturbed = R"({
  "n": 1,
  "structure": {"kind": "from_H_seeded", "n": 1, "amplitude": 0.03, "seed": 5},
  "point": [0.1, 0.0],
  "direction": [0.4, 0.0],
  "disc": {"grid_h": 0.0625}
})";

}  // namespace

TEST_CASE("constants subcommand prints the manifest") {
  auto r = run("constants");
  REQUIRE(r.exit_code == 0);
  auto m = r.kv();
  REQUIRE(m.at("k") == "376.004997644");
  REQUIRE(m.at("theta") == "default-blend-v1");
  REQUIRE(m.at("constants_hash").size() == 16);
  REQUIRE(m.at("constants_hash").find_first_not_of("0123456789abcdef") == std::string::npos);
}

TEST_CASE("lambda0 subcommand leads with the fixed-format answer") {
  auto scene = write_scene("model.json", kSceneModel);
  auto r = run("lambda0 --scene " + scene);
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.first_line() == "lambda0=4.000000");
  REQUIRE(r.kv().at("refined") == "1");
}

TEST_CASE("usage and malformed input map to exit 64") {
  REQUIRE(run("").exit_code == 64);
  REQUIRE(run("no-such-command").exit_code == 64);
  REQUIRE(run("lambda0").exit_code == 64);  // --scene is required

  auto garbage = write_scene("garbage.json", "not json");
  REQUIRE(run("validate --scene " + garbage).exit_code == 64);

  auto unknown = write_scene("unknown.json", R"({"n":1,"structure":{"kind":"wat","n":1}})");
  REQUIRE(run("validate --scene " + unknown).exit_code == 64);

  REQUIRE(run("validate --scene /does/not/exist.json").exit_code == 64);
}

TEST_CASE("validate reports the scene inventory") {
  auto scene = write_scene("model.json", kSceneModel);
  auto r = run("validate --scene " + scene);
  REQUIRE(r.exit_code == 0);
  auto m = r.kv();
  REQUIRE(m.at("n") == "1");
  REQUIRE(m.at("has_structure") == "1");
  REQUIRE(m.at("has_field") == "1");
  REQUIRE(m.at("has_domain") == "1");
  REQUIRE(m.at("ok") == "1");
  REQUIRE(std::stod(m.at("involution_defect")) < 1e-12);
}

TEST_CASE("levi subcommand evaluates the form at the scene point") {
  auto scene = write_scene("model.json", kSceneModel);
  auto r = run("levi --scene " + scene);
  REQUIRE(r.exit_code == 0);
  auto m = r.kv();
  REQUIRE(std::stod(m.at("min_eig")) == Catch::Approx(4.0).margin(1e-9));
  REQUIRE(std::stod(m.at("value")) == Catch::Approx(4.0).margin(1e-9));
}

TEST_CASE("kobayashi basepoint bound round-trips through check") {
  auto scene = write_scene("kob.json", std::string(R"({
  "n": 1,
  "mode": "basepoint",
  "m": 1,
  "structure": {"kind": "standard", "n": 1},
  "field": {"kind": "quadratic_radial", "center": [0, 0], "offset": -1.0},
  "domain": {"shape": "ball", "dim": 2, "radius": 1.0},
  "point": [0, 0],
  "direction": [1, 0]
})"));
  fs::path rep = work_dir() / "kob_rep.json";
  auto r = run("kobayashi --scene " + scene + " --out " + rep.string());
  REQUIRE(r.exit_code == 0);
  auto m = r.kv();
  REQUIRE(m.at("provenance") == "basepoint");
  double lower = std::stod(m.at("lower"));
  REQUIRE(lower == Catch::Approx(0.0178868).margin(1e-6));
  REQUIRE(m.at("constants_hash") == "e6fabc7d4c7ca4b3");
  REQUIRE(fs::exists(rep));

  auto rc = run("kobayashi --scene " + scene + " --check " + rep.string());
  REQUIRE(rc.exit_code == 0);
  REQUIRE(rc.kv().at("check") == "1");

  // tamper with the saved report: the replay must flag it
  std::ofstream(rep, std::ios::trunc) << R"({"lower": 99.0})";
  auto rt = run("kobayashi --scene " + scene + " --check " + rep.string());
  REQUIRE(rt.exit_code == 2);
  REQUIRE(rt.kv().at("check") == "0");
}

TEST_CASE("kobayashi precondition failures map to exit 2") {
  auto scene = write_scene("kob_bad.json", std::string(R"({
  "n": 1,
  "mode": "basepoint",
  "structure": {"kind": "standard", "n": 1},
  "field": {"kind": "quadratic_radial", "center": [0, 0], "offset": -0.5},
  "domain": {"shape": "ball", "dim": 2, "radius": 1.0},
  "point": [0, 0],
  "direction": [1, 0]
})"));
  // barrier is positive near the rim, a precondition (not usage) failure
  REQUIRE(run("kobayashi --scene " + scene).exit_code == 2);
}

TEST_CASE("attach writes per-node CSV and a meta report") {
  auto scene = write_scene("disc.json", kScenePerturbed);
  fs::path out = work_dir() / "mydisc";
  auto r = run("attach --scene " + scene + " --out " + out.string());
  REQUIRE(r.exit_code == 0);
  auto m = r.kv();
  REQUIRE(m.at("converged") == "1");
  REQUIRE(m.at("reflected") == "1");
  REQUIRE(std::stod(m.at("diameter_imag_sup")) == 0.0);
  REQUIRE(std::stod(m.at("residual")) < 1e-7);

  REQUIRE(fs::exists(out.string() + ".csv"));
  REQUIRE(fs::exists(out.string() + ".json"));
  std::ifstream csv(out.string() + ".csv");
  std::string header;
  std::getline(csv, header);
  REQUIRE(header ==
          "k,i,j,x,y,weight,arc_weight,interior,h0_re,h0_im,f0_re,f0_im,dh0_re,dh0_im");

  auto rc = run("solve-disc --scene " + scene + " --check " + out.string() + ".json");
  // the non-attached solve of the same scene differs from the attached one
  REQUIRE(rc.exit_code == 2);
}

TEST_CASE("solve-disc accepts a grid override") {
  auto scene = write_scene("disc.json", kScenePerturbed);
  auto r = run("solve-disc --scene " + scene + " --grid 0.125");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.kv().at("converged") == "1");
}

TEST_CASE("psh-build certifies the mildly perturbed scene") {
  auto scene = write_scene("psh.json", std::string(R"({
  "n": 1,
  "structure": {"kind": "from_H_seeded", "n": 1, "amplitude": 0.004, "seed": 9},
  "domain": {"shape": "ball", "dim": 2, "radius": 1.0},
  "barrier": {"center": [0, 0], "r": 0.5, "A": 2.0}
})"));
  auto r = run("psh-build --scene " + scene);
  REQUIRE(r.exit_code == 0);
  auto m = r.kv();
  REQUIRE(m.at("certified") == "1");
  REQUIRE(std::stod(m.at("k")) == Catch::Approx(376.004997644).margin(1e-8));
  REQUIRE(std::stod(m.at("lambda0")) > 0.0);

  // too-shallow slope is rejected as bad input
  auto shallow = write_scene("psh_shallow.json", std::string(R"({
  "n": 1,
  "structure": {"kind": "standard", "n": 1},
  "domain": {"shape": "ball", "dim": 2, "radius": 1.0},
  "barrier": {"center": [0, 0], "r": 0.5, "A": 0.5}
})"));
  auto rs = run("psh-build --scene " + shallow);
  REQUIRE(rs.exit_code == 2);
}

TEST_CASE("chart subcommand reports the dyadic dilation") {
  auto scene = write_scene("disc.json", kScenePerturbed);
  auto r = run("chart --scene " + scene);
  REQUIRE(r.exit_code == 0);
  auto m = r.kv();
  double t = std::stod(m.at("t"));
  REQUIRE(t > 0.0);
  REQUIRE(t <= 1.0);
  REQUIRE(std::abs(std::log2(t) - std::round(std::log2(t))) < 1e-12);
  REQUIRE(std::stod(m.at("measured_c1")) <= std::stod(m.at("epsilon")));
}

TEST_CASE("study subcommand writes deterministic reports") {
  auto scene = write_scene("study.json", std::string(R"({
  "study": {
    "n": 1,
    "amplitudes": [0.0, 0.02],
    "discs_per_amplitude": 1,
    "grid_h": 0.0625,
    "seed": 20260816
  }
})"));
  fs::path dir = work_dir() / "study_out";
  auto r = run("study --scene " + scene + " --out " + dir.string());
  REQUIRE(r.exit_code == 0);
  auto m = r.kv();
  REQUIRE(m.at("all_passed") == "1");
  REQUIRE(m.at("failures") == "0");
  REQUIRE(m.at("rows") == "2");
  REQUIRE(fs::exists(dir / "study.csv"));
  REQUIRE(fs::exists(dir / "study.json"));

  std::ifstream csvf(dir / "study.csv");
  std::string first_run((std::istreambuf_iterator<char>(csvf)), std::istreambuf_iterator<char>());
  auto r2 = run("study --scene " + scene + " --out " + dir.string());
  REQUIRE(r2.exit_code == 0);
  std::ifstream csvf2(dir / "study.csv");
  std::string second_run((std::istreambuf_iterator<char>(csvf2)),
                         std::istreambuf_iterator<char>());
  REQUIRE(first_run == second_run);
}

TEST_CASE("kobayashi upper search brackets the model metric") {
  auto scene = write_scene("kob_up.json", std::string(R"({
  "n": 1,
  "mode": "basepoint",
  "m": 1,
  "structure": {"kind": "standard", "n": 1},
  "field": {"kind": "quadratic_radial", "center": [0, 0], "offset": -1.0},
  "domain": {"shape": "ball", "dim": 2, "radius": 1.0},
  "point": [0, 0],
  "direction": [1, 0]
})"));
  auto r = run("kobayashi --scene " + scene + " --upper --grid 0.0625");
  REQUIRE(r.exit_code == 0);
  auto m = r.kv();
  REQUIRE(m.at("upper_feasible") == "1");
  double upper = std::stod(m.at("upper"));
  double lower = std::stod(m.at("lower"));
  REQUIRE(upper >= 1.0 - 1e-9);
  REQUIRE(upper <= 1.05);
  REQUIRE(lower <= upper);
}
