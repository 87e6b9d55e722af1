#include "lagflow/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "lagflow/energetics.hpp"
#include "lagflow/extension.hpp"
#include "lagflow/io.hpp"
#include "lagflow/verify.hpp"

namespace lagflow {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Options {
  std::string config;
  std::string out;
  std::optional<double> t_end;
  std::optional<std::uint64_t> seed;
  std::optional<int> segments;
  std::optional<double> margin;
  bool non_strict = false;
};

std::string overrides(const Options& o) {
  json j = json::object();
  if (o.t_end) j["t_end"] = *o.t_end;
  if (o.seed) j["seed"] = *o.seed;
  if (o.non_strict) j["non_strict"] = true;
  if (!o.out.empty()) j["output"]["dir"] = o.out;
  if (o.segments) j["extend"]["segments"] = *o.segments;
  if (o.margin) j["extend"]["margin"] = *o.margin;
  return j.dump();
}

Scenario scenario_from(const Options& o) {
  Scenario s = load_scenario(o.config, overrides(o));
  std::cout << "# config_hash=" << scenario_hash(s) << '\n' << echo_scenario(s) << '\n';
  return s;
}

void write_config(const Scenario& s) {
  nlohmann::ordered_json j;
  j["config_hash"] = scenario_hash(s);
  j["config"] = nlohmann::ordered_json::parse(echo_scenario(s));
  fs::create_directories(s.out_dir);
  std::ofstream out(fs::path(s.out_dir) / "config.json", std::ios::binary);
  if (!out) throw Error("cannot write " + (fs::path(s.out_dir) / "config.json").string());
  out << j.dump(2) << '\n';
}

Trajectory subset(const Trajectory& tr, const std::vector<std::size_t>& idx) {
  Trajectory out;
  out.failure = tr.failure;
  for (std::size_t k : idx) {
    out.snapshots.push_back(tr.snapshots[k]);
    out.boundary_work.push_back(k < tr.boundary_work.size() ? tr.boundary_work[k] : 0.0);
    out.boundary_impulse.push_back(k < tr.boundary_impulse.size() ? tr.boundary_impulse[k] : 0.0);
  }
  return out;
}

// ---- verify ---------------------------------------------------------------

struct SuiteResult {
  std::string name;
  bool pass;
  std::string detail;
};

SuiteResult suite_inequalities() {
  const auto rep = inequality_oracles(12345, 100000, {1.1, 1.5, 1.9});
  long viol = 0;
  double scale = 0.0, change = 0.0;
  for (const auto& m : rep.monotonicity) {
    viol += m.violations;
    scale = std::max(scale, m.max_scale_residual);
  }
  for (const auto& r : rep.interpolation) change = std::max(change, r.relative_change);
  const bool ok = viol == 0 && scale <= 1e-10 && change <= 0.02;
  return {"inequalities", ok,
          "violations=" + std::to_string(viol) + fmt(" scale_residual=%.3g", scale) + fmt(" ratio_change=%.3g", change)};
}

SuiteResult suite_gronwall() {
  double worst = 0.0;
  bool horizon_ok = true;
  for (int i = 0; i < 100; ++i) {
    const double c0 = 0.1 + 0.02 * i, sigma = 0.25 + 0.015 * (i % 50), f0 = 1.0 + 0.01 * (i % 7);
    const double T = 1.0 / (sigma * c0 * std::pow(f0, sigma));
    const double t = T * (0.05 + 0.009 * i);
    const double exact = f0 * std::pow(1.0 - sigma * c0 * std::pow(f0, sigma) * t, -1.0 / sigma);
    worst = std::max(worst, std::abs(local_gronwall_bound(f0, {}, c0, sigma, 0.0, t) - exact) / exact);
    try {
      local_gronwall_bound(f0, {}, c0, sigma, 0.0, T * 1.001);
      horizon_ok = false;
    } catch (const HorizonExceeded&) {
    }
  }
  return {"gronwall", worst <= 1e-10 && horizon_ok, fmt("max_rel_err=%.3g", worst)};
}

SuiteResult suite_extension() {
  double h_err = 0.0;
  for (int k = 2; k <= 10; ++k) h_err = std::max(h_err, std::abs(h_of_k_eta(k, 1.0, 1.5) - 1.0));
  bool mono = true;
  for (double q : {1.2, 1.5, 1.8}) {
    double prev = g_of_k(1.0, q);
    for (int i = 1; i < 200; ++i) {
      const double g = g_of_k(std::pow(1e4, i / 199.0), q);
      mono = mono && g > prev;
      prev = g;
    }
  }
  return {"extension", h_err <= 1e-12 && mono, fmt("h_err=%.3g", h_err) + (mono ? " g increasing" : " g not increasing")};
}

SuiteResult suite_mms() {
  FluidParams prm;
  prm.p = prm.q = 2.0;
  prm.eps_reg = 0.0;
  prm.strict_mode = false;
  MmsStudy st;
  st.fields = trig_family({});
  st.params = prm;
  const auto space = mms_convergence(st);
  st.kind = Refinement::time;
  const auto time = mms_convergence(st);
  FluidParams reg;
  reg.p = reg.q = 1.5;
  MmsStudy sr;
  sr.fields = trig_family({});
  sr.params = reg;
  const auto rspace = mms_convergence(sr);
  const bool ok = space.min_order() >= 1.8 && time.min_order() >= 0.9 && rspace.min_order() >= 0.9;
  return {"mms", ok,
          fmt("space=%.3f", space.min_order()) + fmt(" time=%.3f", time.min_order()) +
              fmt(" space_q1.5=%.3f", rspace.min_order())};
}

SuiteResult suite_reduction() {
  FluidParams prm;
  prm.p = prm.q = 2.0;
  prm.eps_reg = 0.0;
  prm.strict_mode = false;
  Scenario s;
  s.params = prm;
  s.profile.kind = ProfileKind::custom;
  s.v0 = {"gaussian", 0.0, 1.0, 1.0};
  s.Theta0 = {"constant", 0.0};
  s.N = 401;
  const auto rep = reduction_check(prm, build_initial_data(s), s.solver, 100);
  return {"reduction", rep.max_discrepancy <= 1e-10, fmt("max_discrepancy=%.3g", rep.max_discrepancy)};
}

SuiteResult suite_steady() {
  FluidParams prm;
  MmsStudy st;
  st.fields = steady_state_family(1.0, 1.0);
  st.params = prm;
  st.N_values = {101};
  const auto tab = mms_convergence(st);
  const double err = tab.rows.front().err;
  return {"steady_state", err <= 1e-12, fmt("max_err=%.3g", err)};
}

int cmd_verify() {
  using Suite = SuiteResult (*)();
  const std::vector<Suite> suites = {suite_inequalities, suite_gronwall, suite_extension,
                                     suite_steady,       suite_reduction, suite_mms};
  bool all = true;
  for (Suite s : suites) {
    const SuiteResult r = s();
    all = all && r.pass;
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  " << r.detail << std::endl;
  }
  return all ? exit_ok : exit_assertion;
}

// ---- audit ----------------------------------------------------------------

double time_from_name(const fs::path& p) {
  const std::string stem = p.stem().string();
  return std::strtod(stem.c_str() + 5, nullptr);
}

Scenario scenario_from_doc(json doc, const std::string& overrides_json) {
  if (!doc.is_object()) throw ConfigError("<root>", "expected an object");
  doc.merge_patch(json::parse(overrides_json));
  return parse_scenario(doc.dump());
}

int audit_dir(const Scenario& s, const fs::path& dir) {
  std::vector<fs::path> files;
  if (fs::exists(dir))
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().filename().string().rfind("snap_", 0) == 0 && e.path().extension() == ".csv")
        files.push_back(e.path());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return time_from_name(a) < time_from_name(b); });
  if (files.empty()) {
    std::cout << "FAIL no snapshots in " << dir.string() << '\n';
    return exit_assertion;
  }
  const InitialData init = build_initial_data(s);
  const std::string hash = scenario_hash(s);
  const Field m0 = init.J0 * init.rho0;
  std::vector<State> snaps;
  for (const auto& f : files) {
    try {
      std::ifstream in(f);
      std::string header;
      std::getline(in, header);
      if (header.find("config_hash=" + hash) == std::string::npos)
        throw Error(f.filename().string() + ": configuration hash does not match");
      snaps.push_back(read_snapshot(f, init.grid));
    } catch (const Error& e) {
      std::cout << "FAIL snapshot t=" << fmt("%.9f", time_from_name(f)) << ": " << e.what() << '\n';
      return exit_assertion;
    }
    const State& st = snaps.back();
    const double mass = (st.J * st.rho - m0).abs().maxCoeff() / m0.maxCoeff();
    if (!(mass <= 1e-12)) {
      std::cout << "FAIL snapshot t=" << format_double(st.t) << ": mass residual " << format_double(mass) << '\n';
      return exit_assertion;
    }
    if (!(st.J.minCoeff() > 0.0)) {
      std::cout << "FAIL snapshot t=" << format_double(st.t) << ": inf J = " << format_double(st.J.minCoeff()) << '\n';
      return exit_assertion;
    }
  }
  try {
    const BoundAudit a = check_bounds(snaps, init, s.params);
    for (const auto& r : a.rows)
      std::cout << "t=" << format_double(r.t) << fmt(" margin=%.4g", r.margin)
                << (r.in_scope ? fmt(" ratio_E=%.6g", r.ratio_E) + fmt(" ratio_supJ=%.6g", r.ratio_supJ) +
                                     fmt(" ratio_infJ=%.6g", r.ratio_infJ)
                               : std::string(" out of scope"))
                << '\n';
    if (!a.passed) {
      std::cout << "FAIL snapshot t=" << format_double(a.first_failure_time) << ": bound ratio exceeded\n";
      return exit_assertion;
    }
  } catch (const DomainError& e) {
    std::cout << "note: bound envelope unavailable (" << e.what() << ")\n";
  }
  std::cout << "PASS audit of " << snaps.size() << " snapshots\n";
  return exit_ok;
}

int cmd_audit(const Options& o) {
  if (!o.config.empty()) {
    const Scenario s = load_scenario(o.config, overrides(o));
    return audit_dir(s, s.out_dir);
  }
  const fs::path dir = o.out.empty() ? fs::path("out") : fs::path(o.out);
  if (!fs::exists(dir / "config.json")) throw ConfigError("--config", "no config.json in " + dir.string());
  Options rest = o;
  rest.out.clear();
  return audit_dir(scenario_from_doc(json::parse(read_text(dir / "config.json")).at("config"), overrides(rest)), dir);
}

// ---- extend ---------------------------------------------------------------

int cmd_extend(const Scenario& s) {
  const InitialData init = build_initial_data(s);
  ExtensionConfig cfg;
  cfg.margin_target = s.margin;
  const Schedule sch = schedule_extension(make_segment_runner(init, s.solver, s.params), init, s.params, cfg, s.segments);
  write_config(s);
  write_schedule(fs::path(s.out_dir) / "schedule.json", sch, scenario_hash(s));
  for (std::size_t l = 0; l < sch.segments.size(); ++l) {
    const auto& g = sch.segments[l];
    std::cout << "segment " << l + 1 << fmt(": [%.6g, ", g.T_start) << fmt("%.6g]", g.T_end)
              << fmt(" H=%.6g", g.H_start) << fmt(" G=%.6g", g.G) << fmt(" delta=%.6g", g.delta)
              << fmt(" eta=%.6g", g.eta) << (g.completed ? "" : " (incomplete)") << '\n';
  }
  std::cout << "cumulative time " << format_double(sch.cumulative_time) << '\n';
  if (sch.failure) {
    std::cout << "solver failure (" << sch.failure->kind << ") at t=" << format_double(sch.failure->t) << ": "
              << sch.failure->message << '\n';
    return exit_solver;
  }
  return exit_ok;
}

// ---- sweep ----------------------------------------------------------------

std::string value_tag(double x) { return fmt("%g", x); }

int cmd_sweep(const Scenario& base) {
  if (base.sweep.param.empty()) throw ConfigError("sweep.param", "required for the sweep command");
  const auto& values = base.sweep.values;
  std::vector<int> codes(values.size(), exit_ok);
  std::vector<std::string> logs(values.size());
  std::atomic<std::size_t> next{0};
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers =
      std::min<unsigned>(base.sweep.workers > 0 ? static_cast<unsigned>(base.sweep.workers) : hw,
                         static_cast<unsigned>(values.size()));
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < values.size();) {
      Scenario s = base;
      s.sweep = {};
      s.out_dir = (fs::path(base.out_dir) / (base.sweep.param + "=" + value_tag(values[i]))).string();
      try {
        set_sweep_parameter(s, base.sweep.param, values[i]);
        validate_scenario(s);
        codes[i] = execute_run(s, logs[i]);
      } catch (const ConfigError& e) {
        codes[i] = exit_schema;
        logs[i] += std::string("config error: ") + e.what() + '\n';
      } catch (const PhysicsError& e) {
        codes[i] = exit_physics;
        logs[i] += std::string("physics error: ") + e.what() + fmt(" (threshold %.10g)", e.threshold()) + '\n';
      } catch (const std::exception& e) {
        codes[i] = exit_assertion;
        logs[i] += std::string("error: ") + e.what() + '\n';
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();

  int worst = exit_ok;
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::cout << "== " << base.sweep.param << " = " << value_tag(values[i]) << " (exit " << codes[i] << ")\n"
              << logs[i];
    if (worst == exit_ok) worst = codes[i];
  }
  return worst;
}

// ---- report ---------------------------------------------------------------

int cmd_report(const Options& o) {
  const fs::path dir = o.out.empty() ? fs::path("out") : fs::path(o.out);
  bool found = false;
  if (fs::exists(dir / "config.json")) {
    const json cfg = json::parse(read_text(dir / "config.json"));
    std::cout << "configuration " << cfg.value("config_hash", std::string("?")) << '\n';
  }
  if (fs::exists(dir / "diagnostics.csv")) {
    found = true;
    std::ifstream in(dir / "diagnostics.csv");
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    std::vector<std::string> cols;
    {
      std::stringstream ss(line);
      for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    }
    std::map<std::string, std::vector<double>> data;
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::size_t k = 0;
      for (std::string c; std::getline(ss, c, ',') && k < cols.size(); ++k) data[cols[k]].push_back(std::strtod(c.c_str(), nullptr));
    }
    auto maxof = [&](const std::string& c) {
      double m = -INFINITY;
      for (double x : data[c])
        if (!std::isnan(x)) m = std::max(m, x);
      return m;
    };
    auto minof = [&](const std::string& c) {
      double m = INFINITY;
      for (double x : data[c])
        if (!std::isnan(x)) m = std::min(m, x);
      return m;
    };
    const auto& t = data["t"];
    std::cout << "diagnostics: " << t.size() << " rows";
    if (!t.empty()) std::cout << fmt(", t in [%.6g, ", t.front()) << fmt("%.6g]", t.back());
    std::cout << '\n'
              << fmt("  energy functional   %.6g", data["E"].empty() ? NAN : data["E"].front())
              << fmt(" -> %.6g\n", data["E"].empty() ? NAN : data["E"].back())
              << fmt("  inf J (min)         %.6g\n", minof("inf_J")) << fmt("  sup J (max)         %.6g\n", maxof("sup_J"))
              << fmt("  theta_min (min)     %.6g\n", minof("theta_min"))
              << fmt("  mass residual (max) %.3g\n", maxof("mass_residual"))
              << fmt("  energy drift (max)  %.3g\n", maxof("energy_drift"))
              << fmt("  margin (max)        %.6g\n", maxof("margin"))
              << fmt("  ratio_E (max)       %.6g\n", maxof("ratio_E"))
              << fmt("  ratio_supJ (max)    %.6g\n", maxof("ratio_supJ"))
              << fmt("  ratio_infJ (max)    %.6g\n", maxof("ratio_infJ"));
  }
  if (fs::exists(dir / "schedule.json")) {
    found = true;
    const json sch = json::parse(read_text(dir / "schedule.json"));
    const auto& segs = sch.at("segments");
    std::cout << "schedule: " << segs.size() << " segments, cumulative time "
              << fmt("%.6g", sch.at("cumulative_time").get<double>()) << '\n';
    for (const auto& g : segs)
      std::cout << fmt("  [%.6g, ", g.at("T_start").get<double>()) << fmt("%.6g]", g.at("T_end").get<double>())
                << fmt(" step lower bound %.4g", g.at("step_lower_bound").get<double>())
                << (g.at("completed").get<bool>() ? "" : " incomplete") << '\n';
    if (!sch.at("failure").is_null()) std::cout << "  failure: " << sch.at("failure").at("message").get<std::string>() << '\n';
  }
  std::size_t nsnap = 0;
  if (fs::exists(dir))
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().filename().string().rfind("snap_", 0) == 0) ++nsnap;
  if (nsnap) {
    found = true;
    std::cout << "snapshots: " << nsnap << '\n';
  }
  if (!found) {
    std::cout << "nothing to report in " << dir.string() << '\n';
    return exit_assertion;
  }
  return exit_ok;
}

}  // namespace

Scenario load_scenario(const std::string& path, const std::string& overrides_json) {
  if (path.empty()) return scenario_from_doc(json::object(), overrides_json);
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("not valid JSON: ") + e.what());
  }
  return scenario_from_doc(std::move(doc), overrides_json);
}

void set_sweep_parameter(Scenario& s, const std::string& param, double x) {
  if (param == "alpha") s.params.alpha = x;
  else if (param == "q") s.params.q = x;
  else if (param == "p") s.params.p = x;
  else if (param == "l") s.profile.l = x;
  else if (param == "eps_reg") s.params.eps_reg = x;
  else if (param == "density_floor_eps") s.solver.density_floor_eps = x;
  else if (param == "dt") s.solver.dt = x;
  else throw ConfigError("sweep.param", "unknown sweep parameter '" + param + "'");
}

int execute_run(const Scenario& s, std::string& log) {
  const InitialData init = build_initial_data(s);
  const std::string hash = scenario_hash(s);
  const int every = std::gcd(s.diag_every, s.snapshot_every);
  const Trajectory tr = run(init, s.solver, s.params, s.t_end, nullptr, every);

  // Stored index k holds step k*every, except the final state.
  std::vector<std::size_t> diag_idx, snap_idx;
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    const long step = static_cast<long>(k) * every;
    const bool last = k + 1 == tr.snapshots.size();
    if (step % s.diag_every == 0 || last) diag_idx.push_back(k);
    if (step % s.snapshot_every == 0 || last) snap_idx.push_back(k);
  }
  write_config(s);
  const fs::path dir(s.out_dir);
  for (std::size_t k : snap_idx) write_snapshot(dir / snapshot_name(tr.snapshots[k].t), tr.snapshots[k], init.grid, hash);
  write_diagnostics(dir / "diagnostics.csv", subset(tr, diag_idx), init, s.params, hash);

  const AuditReport a = conservation_audit(tr, init, s.params, s.solver.tol_neg);
  log += "steps to t=" + format_double(tr.snapshots.back().t) + ", " + std::to_string(snap_idx.size()) +
         " snapshots in " + dir.string() + '\n';
  log += fmt("mass residual %.3g", a.mass_residual) + fmt(", energy drift %.3g", a.energy_drift) +
         fmt(", theta_min %.6g", a.theta_min) + '\n';
  if (a.theta_negative_nodes > 0)
    log += "warning: " + std::to_string(a.theta_negative_nodes) + " node values with Theta < -tol_neg\n";
  if (tr.failure) {
    log += "solver failure (" + tr.failure->kind + ") at t=" + format_double(tr.failure->t) + ": " +
           tr.failure->message + '\n';
    return exit_solver;
  }
  return exit_ok;
}

int run_command(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_command(static_cast<int>(argv.size()), argv.data());
}

int run_command(int argc, const char* const* argv) {
  CLI::App app{"Lagrangian power-law heat-conducting fluid solver", "lagflow"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* c) {
    c->add_option("--config", o.config, "JSON configuration file");
    c->add_option("--t-end", o.t_end, "final time");
    c->add_option("--out", o.out, "output directory");
    c->add_option("--seed", o.seed, "seed for random initial fields");
    c->add_flag("--non-strict", o.non_strict, "allow exponents equal to 2");
    c->add_option("--margin", o.margin, "admissibility margin per segment");
  };
  CLI::App* run_c = app.add_subcommand("run", "integrate a scenario and write snapshots and diagnostics");
  CLI::App* verify_c = app.add_subcommand("verify", "run the oracle suites");
  CLI::App* audit_c = app.add_subcommand("audit", "audit a stored trajectory");
  CLI::App* extend_c = app.add_subcommand("extend", "schedule restart segments");
  CLI::App* sweep_c = app.add_subcommand("sweep", "independent runs over a parameter grid");
  CLI::App* report_c = app.add_subcommand("report", "summarize stored outputs");
  for (CLI::App* c : {run_c, audit_c, extend_c, sweep_c}) common(c);
  extend_c->add_option("--segments", o.segments, "number of segments");
  report_c->add_option("--out", o.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_schema;
  }

  try {
    if (*verify_c) return cmd_verify();
    if (*report_c) return cmd_report(o);
    if (*audit_c) return cmd_audit(o);
    const Scenario s = scenario_from(o);
    if (*extend_c) return cmd_extend(s);
    if (*sweep_c) return cmd_sweep(s);
    std::string log;
    const int code = execute_run(s, log);
    std::cout << log;
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "config error at " << e.what() << '\n';
    return exit_schema;
  } catch (const PhysicsError& e) {
    std::cerr << "physics error: " << e.what() << fmt(" (threshold %.10g)", e.threshold()) << '\n';
    return exit_physics;
  } catch (const DomainError& e) {
    std::cerr << "physics error: " << e.what() << '\n';
    return exit_physics;
  } catch (const JacobianDegeneracy& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return exit_solver;
  } catch (const NonContraction& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return exit_solver;
  } catch (const NewtonFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return exit_solver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_assertion;
  }
}

}  // namespace lagflow
