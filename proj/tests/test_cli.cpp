#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lagflow/cli.hpp"
#include "lagflow/io.hpp"

using namespace lagflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lagflow_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("minimal document fills documented defaults") {
  const Scenario s = parse_scenario(R"({"p":1.5,"q":1.5,"alpha":-6,"profile":{"K":1,"l":0.04,"A0":1}})");
  CHECK(s.params.R == 1.0);
  CHECK(s.r_trunc == 20.0);
  CHECK(s.N == 801);
  CHECK(s.solver.dt == 1e-3);
}

TEST_CASE("echo round trip is idempotent") {
  const Scenario s = parse_scenario(R"({"q":1.4,"grid":{"N":401},"initial":{"v":{"family":"random_bumps","amplitude":0.2}}})");
  const std::string once = echo_scenario(s);
  const std::string twice = echo_scenario(parse_scenario(once));
  CHECK(once == twice);
  CHECK(scenario_hash(s) == scenario_hash(parse_scenario(once)));
  CHECK(scenario_hash(s).size() == 16);
}

TEST_CASE("schema and physics errors") {
  try {
    parse_scenario(R"({"solver":{"dtt":1}})");
    FAIL("unknown key accepted");
  } catch (const ConfigError& e) {
    CHECK(e.path() == "solver.dtt");
  }
  CHECK_THROWS_AS(parse_scenario(R"({"q":2})"), PhysicsError);
  CHECK_NOTHROW(parse_scenario(R"({"q":2,"p":2,"alpha":-10,"non_strict":true})"));
  try {
    parse_scenario(R"({"alpha":-4})");
    FAIL("alpha above threshold accepted");
  } catch (const PhysicsError& e) {
    CHECK(e.threshold() == doctest::Approx(-5.0));
  }

  const fs::path dir = scratch("errors");
  write(dir / "q2.json", R"({"q":2})");
  write(dir / "bad.json", R"({"grid":{"N":"many"}})");
  CHECK(run_command({"lagflow", "run", "--config", (dir / "q2.json").string(), "--out", (dir / "o").string()}) ==
        exit_physics);
  CHECK(run_command({"lagflow", "run", "--config", (dir / "bad.json").string()}) == exit_schema);
  CHECK(run_command({"lagflow", "frobnicate"}) == exit_schema);
}

TEST_CASE("run with zero horizon emits one snapshot") {
  const fs::path dir = scratch("zero");
  CHECK(run_command({"lagflow", "run", "--t-end", "0", "--out", dir.string()}) == exit_ok);
  long snaps = 0;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename().string().rfind("snap_", 0) == 0) ++snaps;
  CHECK(snaps == 1);
  CHECK(fs::exists(dir / "snap_0.000000000.csv"));
}

TEST_CASE("files carry the configuration hash and runs are reproducible") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const std::string cfg = (a / "cfg.json").string();
  write(cfg, R"({"t_end":0.01,"grid":{"N":201},"initial":{"v":{"family":"random_bumps","amplitude":0.1}},"seed":7})");
  REQUIRE(run_command({"lagflow", "run", "--config", cfg, "--out", (a / "o").string()}) == exit_ok);
  REQUIRE(run_command({"lagflow", "run", "--config", cfg, "--out", (b / "o").string()}) == exit_ok);
  const std::string da = slurp(a / "o" / "diagnostics.csv");
  CHECK(da.substr(0, da.find('\n')).find("config_hash=") != std::string::npos);
  const Scenario s = load_scenario(cfg, R"({"output":{"dir":")" + (a / "o").generic_string() + "\"}}");
  CHECK(da.find(scenario_hash(s)) != std::string::npos);
  for (const auto& e : fs::directory_iterator(a / "o")) {
    const std::string text = slurp(e.path());
    CHECK(text.find(scenario_hash(s)) != std::string::npos);
  }
  // Output directory is part of the configuration, so only the bodies are compared.
  const std::string db = slurp(b / "o" / "diagnostics.csv");
  CHECK(da.substr(da.find('\n')) == db.substr(db.find('\n')));
}

TEST_CASE("snapshot round trip") {
  const fs::path dir = scratch("snap");
  const Grid g = build_grid(2.0, 9);
  State s;
  s.t = 0.125;
  s.J = Field::LinSpaced(9, 0.9, 1.1);
  s.rho = 1.0 / s.J;
  s.v = g.nodes.sin() / 3.0;
  s.Theta = g.nodes.square() + 1e-300;
  write_snapshot(dir / snapshot_name(s.t), s, g, "0123456789abcdef");
  const State r = read_snapshot(dir / "snap_0.125000000.csv", g);
  CHECK(r.t == s.t);
  CHECK((r.v - s.v).abs().maxCoeff() == 0.0);
  CHECK((r.Theta - s.Theta).abs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(read_snapshot(dir / "snap_0.125000000.csv", build_grid(2.0, 11)), Error);
}

TEST_CASE("audit detects a corrupted snapshot") {
  const fs::path dir = scratch("audit");
  const std::string out = (dir / "o").string();
  REQUIRE(run_command({"lagflow", "run", "--t-end", "0.02", "--out", out}) == exit_ok);
  CHECK(run_command({"lagflow", "audit", "--out", out}) == exit_ok);

  const fs::path victim = dir / "o" / "snap_0.010000000.csv";
  std::string text = slurp(victim);
  const auto pos = text.find('\n', text.find('\n', text.find('\n') + 1) + 1);
  text.replace(pos + 1, 3, "x,y");
  write(victim, text);
  CHECK(run_command({"lagflow", "audit", "--out", out}) == exit_assertion);
}

TEST_CASE("sweep reports the worst exit code") {
  const fs::path dir = scratch("sweep");
  const std::string cfg = (dir / "cfg.json").string();
  write(cfg, R"({"t_end":0.005,"grid":{"N":101},"sweep":{"param":"alpha","values":[-7,-6],"workers":2}})");
  CHECK(run_command({"lagflow", "sweep", "--config", cfg, "--out", (dir / "o").string()}) == exit_ok);
  CHECK(fs::exists(dir / "o" / "alpha=-7" / "diagnostics.csv"));
  write(cfg, R"({"t_end":0.005,"grid":{"N":101},"sweep":{"param":"alpha","values":[-6,-3]}})");
  CHECK(run_command({"lagflow", "sweep", "--config", cfg, "--out", (dir / "p").string()}) == exit_physics);
}

TEST_CASE("extend writes a schedule and report reads it") {
  const fs::path dir = scratch("extend");
  const std::string out = (dir / "o").string();
  write(dir / "cfg.json", R"({"grid":{"N":201},"solver":{"dt":0.01}})");
  CHECK(run_command({"lagflow", "extend", "--config", (dir / "cfg.json").string(), "--segments", "2", "--out", out}) ==
        exit_ok);
  const std::string sched = slurp(dir / "o" / "schedule.json");
  CHECK(sched.find("\"config_hash\"") != std::string::npos);
  CHECK(sched.find("\"segments\"") != std::string::npos);
  CHECK(run_command({"lagflow", "report", "--out", out}) == exit_ok);
  CHECK(run_command({"lagflow", "report", "--out", (dir / "missing").string()}) == exit_assertion);
}
