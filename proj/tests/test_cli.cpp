#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "app_config.hpp"
#include "manifest.hpp"
#include "pipeline.hpp"
#include "test_util.hpp"
#include "vcrit/errors.hpp"
#include "vcrit/harmonic.hpp"
#include "vcrit/slf.hpp"
#include "vcrit/sparseness.hpp"

namespace fs = std::filesystem;
using namespace vcrit;
using namespace vcrit::app;

namespace {

const char* kRing = R"(grid: {n: 16}
flow: {kind: ring, viscosity: 0.05}
ring: {radius: 1.0, core_radius: 0.3, circulation: 1.0}
solver: {t_final: 0.5, snapshot_interval: 0.25}
analysis: {bmo_stride: 0}
)";

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("vcrit_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

CommandContext context(const std::string& yaml, const fs::path& out) {
  CommandContext ctx;
  ctx.config = parse_config(yaml);
  ctx.out_dir = out;
  return ctx;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

std::string config_error(const std::string& yaml) {
  try {
    parse_config(yaml);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(VCRIT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config: defaults, unknown keys and bad values name the line") {
  const AppConfig c = parse_config(kRing);
  CHECK(c.grid.n == 16);
  CHECK(c.flow.kind == FlowKind::Ring);
  CHECK(c.ring.center[0] == doctest::Approx(c.grid.box_length / 2));
  CHECK(c.analysis.delta == 0.75);
  CHECK_FALSE(c.analysis.lambda.has_value());
  CHECK(c.constants.c_star == 1.0);
  CHECK_FALSE(c.has_harmonic);

  CHECK(config_error("grid:\n  n: 32\n  bogus: 1\n").find("line 3") != std::string::npos);
  CHECK(config_error("grid: {n: 12}\n").find("line 1") != std::string::npos);
  CHECK(config_error("grid: {n: 32}\nflow: {viscosity: abc}\n").find("line 2") != std::string::npos);
  CHECK_FALSE(config_error("flow: {kind: jet}\n").empty());
  CHECK_FALSE(config_error("ring: {radius: 1.0, core_radius: 0.9}\n").empty());
  CHECK_FALSE(config_error("constants: {c3: 0}\n").empty());
  CHECK(parse_config("analysis: {lambda: auto}\n").analysis.lambda == std::nullopt);
  CHECK(*parse_config("analysis: {lambda: 0.3}\n").analysis.lambda == 0.3);
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.yaml"), IoError);
}

TEST_CASE("manifest: sha-256 test vector and recorded digests") {
  CHECK(sha256_bytes("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_bytes("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");

  const fs::path d = fresh_dir("manifest");
  const auto p = cmd_generate(context(kRing, d));
  CHECK(sha256_file(p) == sha256_bytes(slurp(p)));
  std::ifstream in(d / "manifest.jsonl");
  std::string line;
  REQUIRE(std::getline(in, line));
  const auto j = nlohmann::json::parse(line);
  CHECK(j.at("command") == "generate");
  CHECK(j.at("tool_version") == kToolVersion);
  REQUIRE(j.at("outputs").size() == 1);
  CHECK(j.at("outputs")[0].at("sha256") == sha256_bytes(slurp(p)));
  CHECK(j.at("outputs")[0].at("bytes") == fs::file_size(p));
  CHECK(j.at("config") == parse_config(kRing).to_json());
}

TEST_CASE("generate: zero circulation and byte-identical reruns") {
  const fs::path a = fresh_dir("gen_a"), b = fresh_dir("gen_b");
  std::string zero = kRing;
  zero.replace(zero.find("circulation: 1.0"), 16, "circulation: 0.0");
  const auto pz = cmd_generate(context(zero, a));
  CHECK(testutil::max_abs(slf::read_field(pz)) == 0.0);

  const auto p1 = cmd_generate(context(kRing, a));
  const auto p2 = cmd_generate(context(kRing, b));
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("evolve: single snapshot, csv rows and resume") {
  std::string once = kRing;
  once.replace(once.find("t_final: 0.5"), 12, "t_final: 0.0");
  const fs::path d0 = fresh_dir("evolve0");
  CHECK(cmd_evolve(context(once, d0)).size() == 1);
  CHECK(fs::exists(d0 / "field_00000.slf"));

  std::string longer = kRing;
  longer.replace(longer.find("t_final: 0.5"), 12, "t_final: 1.0");
  const fs::path straight = fresh_dir("straight"), first = fresh_dir("first"), second = fresh_dir("second");
  const Timeline full = cmd_evolve(context(longer, straight));
  REQUIRE(full.size() == 5);
  CHECK(read_csv(straight / "diagnostics.csv").size() == 6);

  const Timeline half = cmd_evolve(context(kRing, first));
  REQUIRE(half.size() == 3);
  auto ctx = context(longer, second);
  ctx.config.solver.t_start = 0.5;
  ctx.config.solver.initial_field = first / snapshot_file_name(2);
  const Timeline rest = cmd_evolve(ctx);
  REQUIRE(rest.size() == 3);
  const auto wa = slf::read_field(*full.snapshots().back().file);
  const auto wb = slf::read_field(*rest.snapshots().back().file);
  CHECK(rest.snapshots().back().time == doctest::Approx(1.0));
  CHECK(testutil::max_abs_diff(wa, wb) <= 1e-12 * testutil::max_abs(wa));

  const auto lt = load_timeline(straight);
  CHECK(lt.timeline.size() == 5);
  CHECK(lt.nu == 0.05);
  CHECK(lt.gamma == 1.0);
  CHECK(lt.timeline.snapshots()[3].diagnostics.omega_linf == full.snapshots()[3].diagnostics.omega_linf);

  auto bad = context(kRing, fresh_dir("badgrid"));
  bad.config.grid.n = 32;
  bad.config.solver.initial_field = first / snapshot_file_name(2);
  CHECK_THROWS_AS(cmd_evolve(bad), ConfigError);
}

TEST_CASE("analyze: constants, library agreement and the empty-mask sentinel") {
  const fs::path d = fresh_dir("analyze");
  const auto ctx = context(kRing, d);
  cmd_evolve(ctx);
  const auto s = cmd_analyze(ctx);
  CHECK(s.at("lambda").get<double>() == doctest::Approx(0.484283).epsilon(1e-6));
  CHECK(s.at("M").get<double>() == doctest::Approx(1.0324556666280609).epsilon(1e-12));

  const auto lt = load_timeline(d);
  REQUIRE(s.at("snapshots").size() == lt.timeline.size());
  for (std::size_t i = 0; i < lt.timeline.size(); ++i) {
    const auto w = slf::read_field(*lt.timeline.snapshots()[i].file);
    const auto masks = superlevel_masks(w, solve_M().lambda);
    const auto sr = sparseness_scale(masks, 0.75);
    const auto& row = s.at("snapshots")[i];
    CHECK(row.at("volume").get<double>() == masks.union_mask.volume());
    REQUIRE(sr.scale.has_value());
    CHECK(row.at("rs_3d").get<double>() == *sr.scale);
    CHECK(row.at("status") == "ok");
  }
  for (const char* f : {"sparseness.csv", "distribution.csv", "bmo.csv", "bmo.json", "volume_decay.csv",
                        "l1_envelope.csv", "analysis.json"}) {
    CHECK(fs::exists(d / f));
  }
  CHECK(read_csv(d / "sparseness.csv").size() == lt.timeline.size() + 1);

  std::string zero = kRing;
  zero.replace(zero.find("circulation: 1.0"), 16, "circulation: 0.0");
  const fs::path z = fresh_dir("analyze_zero");
  const auto zc = context(zero, z);
  cmd_evolve(zc);
  const auto zs = cmd_analyze(zc);
  for (const auto& row : zs.at("snapshots")) {
    CHECK(row.at("status") == "empty_mask");
    CHECK(row.at("rs_3d").is_null());
  }
  const auto rows = read_csv(z / "sparseness.csv");
  CHECK(rows[1][7] == "nan");
  CHECK(rows[1].back() == "empty_mask");

  CHECK_THROWS_AS(cmd_analyze(context(kRing, fresh_dir("analyze_missing"))), IoError);
}

TEST_CASE("harmonic: table rows") {
  const std::string yaml = std::string(kRing) + "harmonic: {alphas: [0.25, 0.5, 1.0], grid_n: 128}\n";
  const fs::path d = fresh_dir("harmonic");
  const auto p = cmd_harmonic(context(yaml, d));
  const auto rows = read_csv(p);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0][0] == "alpha");
  CHECK(rows[0][2] == "numeric");
  double prev = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double alpha = std::stod(rows[i][0]), closed = std::stod(rows[i][1]);
    CHECK(closed == doctest::Approx(solynin_h(alpha)).epsilon(1e-12));
    CHECK(closed > prev);
    prev = closed;
  }
  CHECK(std::stod(rows[3][2]) == 1.0);
  CHECK(rows[3][5] == "closed_form");
}

TEST_CASE("verdict: decaying run, echoed constants and library agreement") {
  const std::string yaml = std::string(kRing) + "constants: {c3: 2.0}\n";
  const fs::path d = fresh_dir("verdict");
  const auto ctx = context(yaml, d);
  cmd_evolve(ctx);
  const auto v = cmd_verdict(ctx);
  CHECK(v.at("verdict") == "inconclusive");
  CHECK(v.at("constants").at("c3") == 2.0);
  CHECK(v.at("constants").at("c_star") == 1.0);
  CHECK(v.at("formula_layer").at("threshold_satisfied") == false);  // 1 / 0.05 = 20 > 4 pi
  CHECK(v.at("formula_layer").at("consistent") == true);

  const auto lt = load_timeline(d);
  CriticalityOptions o;
  o.bmo_stride = 0;
  o.gamma = lt.gamma;
  const auto lib = criticality_verdict(lt.timeline, lt.nu, ctx.config.constants, o);
  auto expect = nlohmann::json::parse(criticality_json(lib));
  CHECK(v.at("series") == expect.at("series"));
  CHECK(fs::exists(d / "criticality.csv"));
}

TEST_CASE("binary: exit codes") {
  const fs::path d = fresh_dir("exit");
  {
    std::ofstream(d / "ok.yaml") << kRing;
    std::ofstream(d / "bad.yaml") << "grid: {n: 16}\nbogus: 1\n";
  }
  CHECK(run_cli("generate --config " + (d / "ok.yaml").string() + " --out " + (d / "o").string()) == 0);
  CHECK(fs::exists(d / "o" / "initial.slf"));
  CHECK(run_cli("generate --config " + (d / "bad.yaml").string() + " --out " + (d / "o").string()) == 2);
  CHECK(run_cli("generate --config " + (d / "none.yaml").string() + " --out " + (d / "o").string()) == 4);
  CHECK(run_cli("verdict --out " + (d / "empty").string()) == 4);
  CHECK(run_cli("all --config " + (d / "ok.yaml").string() + " --out " + (d / "all").string() +
                " --seed 7 --threads 2") == 0);
  CHECK(fs::exists(d / "all" / "verdict.json"));
}
