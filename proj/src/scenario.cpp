#include "lagflow/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "json.hpp"

namespace lagflow {

namespace {

using json = nlohmann::json;
using ordered = nlohmann::ordered_json;

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

// Reads the members of one JSON object, rejecting unknown keys.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  void number(const std::string& key, double& dst) {
    if (!has(key)) return;
    const json& v = obj_[key];
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    dst = v.get<double>();
    if (!std::isfinite(dst)) throw ConfigError(at(key), "must be finite");
  }

  template <typename Int>
  void integer(const std::string& key, Int& dst) {
    if (!has(key)) return;
    const json& v = obj_[key];
    if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
    if (v.is_number_unsigned()) {
      dst = static_cast<Int>(v.get<std::uint64_t>());
    } else {
      const auto x = v.get<std::int64_t>();
      if (x < 0 && !std::is_signed_v<Int>) throw ConfigError(at(key), "must be nonnegative");
      dst = static_cast<Int>(x);
    }
  }

  void boolean(const std::string& key, bool& dst) {
    if (!has(key)) return;
    if (!obj_[key].is_boolean()) throw ConfigError(at(key), "expected true or false");
    dst = obj_[key].get<bool>();
  }

  void string(const std::string& key, std::string& dst) {
    if (!has(key)) return;
    if (!obj_[key].is_string()) throw ConfigError(at(key), "expected a string");
    dst = obj_[key].get<std::string>();
  }

  const json* object(const std::string& key) {
    if (!has(key)) return nullptr;
    return &obj_[key];
  }

  void finish() const {
    for (const auto& item : obj_.items())
      if (!seen_.count(item.key())) throw ConfigError(at(item.key()), "unknown field");
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_field(const json& obj, const std::string& path, FieldSpec& f) {
  ObjectReader r(obj, path);
  r.string("family", f.family);
  r.number("value", f.value);
  r.number("amplitude", f.amplitude);
  r.number("width", f.width);
  r.number("center", f.center);
  r.number("offset", f.offset);
  r.integer("count", f.count);
  r.number("spread", f.spread);
  r.finish();
  if (f.family != "constant" && f.family != "gaussian" && f.family != "random_bumps")
    throw ConfigError(path + ".family", "unknown family '" + f.family + "' (constant, gaussian, random_bumps)");
  if (!(f.width > 0.0)) throw ConfigError(path + ".width", "must be positive");
  if (f.count < 0) throw ConfigError(path + ".count", "must be nonnegative");
  if (!(f.spread >= 0.0)) throw ConfigError(path + ".spread", "must be nonnegative");
}

ordered field_json(const FieldSpec& f) {
  ordered o;
  o["family"] = f.family;
  o["value"] = f.value;
  o["amplitude"] = f.amplitude;
  o["width"] = f.width;
  o["center"] = f.center;
  o["offset"] = f.offset;
  o["count"] = f.count;
  o["spread"] = f.spread;
  return o;
}

void check_schema(const Scenario& s) {
  if (s.N < 3 || s.N % 2 == 0) throw ConfigError("grid.N", "must be odd and at least 3");
  if (!(s.r_trunc > 0.0)) throw ConfigError("grid.r_trunc", "must be positive");
  if (!(s.solver.dt > 0.0)) throw ConfigError("solver.dt", "must be positive");
  if (!(s.solver.picard_tol > 0.0)) throw ConfigError("solver.picard_tol", "must be positive");
  if (s.solver.picard_max < 1) throw ConfigError("solver.picard_max", "must be at least 1");
  if (!(s.solver.newton_tol > 0.0)) throw ConfigError("solver.newton_tol", "must be positive");
  if (s.solver.newton_max < 1) throw ConfigError("solver.newton_max", "must be at least 1");
  if (!(s.solver.J_floor >= 0.0)) throw ConfigError("solver.J_floor", "must be nonnegative");
  if (!(s.solver.density_floor_eps >= 0.0)) throw ConfigError("solver.density_floor_eps", "must be nonnegative");
  if (!(s.solver.tol_neg >= 0.0)) throw ConfigError("solver.tol_neg", "must be nonnegative");
  if (s.solver.max_halvings < 0) throw ConfigError("solver.max_halvings", "must be nonnegative");
  if (s.snapshot_every < 1) throw ConfigError("output.snapshot_every", "must be at least 1");
  if (s.diag_every < 1) throw ConfigError("diag_every", "must be at least 1");
  if (!(s.t_end >= 0.0)) throw ConfigError("t_end", "must be nonnegative");
  if (s.segments < 1) throw ConfigError("extend.segments", "must be at least 1");
  if (s.profile.kind == ProfileKind::custom && !(s.rho_uniform > 0.0))
    throw ConfigError("profile.value", "must be positive");
  if (!s.sweep.param.empty()) {
    static const std::set<std::string> known = {"alpha", "q", "p", "l", "eps_reg", "density_floor_eps", "dt"};
    if (!known.count(s.sweep.param)) throw ConfigError("sweep.param", "unknown sweep parameter '" + s.sweep.param + "'");
    if (s.sweep.values.empty()) throw ConfigError("sweep.values", "must not be empty");
  }
}

}  // namespace

void validate_scenario(const Scenario& s) {
  check_schema(s);
  const auto rep = validate_params(s.params);
  for (const auto& c : rep.checks) {
    if (c.passed) continue;
    if (c.name == "alpha") throw PhysicsError(c.detail, rep.alpha_threshold);
    if (c.name == "p" || c.name == "q") {
      const double x = c.name == "p" ? s.params.p : s.params.q;
      throw PhysicsError(c.detail + (x == 2.0 ? " (set non_strict for the linear case)" : ""),
                         x <= 1.0 ? 1.0 : 2.0);
    }
    throw PhysicsError(c.detail, 0.0);
  }
  if (s.profile.kind == ProfileKind::power_law) {
    if (!(s.profile.K > 0.0)) throw PhysicsError("profile.K must be positive", 0.0);
    if (!(s.profile.A0 > 0.0 && s.profile.A0 <= s.profile.K))
      throw PhysicsError("profile.A0 must lie in (0, K]", s.profile.K);
    if (!(s.profile.l > 0.0)) throw PhysicsError("profile.l must be positive", 0.0);
    if (s.params.strict_mode) {
      const auto d = decay_report(s.profile.l, s.params);
      if (!d.accepted)
        throw PhysicsError("profile.l = " + num(s.profile.l) + " must lie in (0, l_max) with l_max = " + num(d.l_max),
                           d.l_max);
    }
  }
}

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("not valid JSON: ") + e.what());
  }
  Scenario s;
  ObjectReader r(doc, "");
  r.number("p", s.params.p);
  r.number("q", s.params.q);
  r.number("R", s.params.R);
  r.number("alpha", s.params.alpha);
  r.number("eps_reg", s.params.eps_reg);
  bool non_strict = false;
  r.boolean("non_strict", non_strict);
  s.params.strict_mode = !non_strict;

  if (const json* o = r.object("profile")) {
    ObjectReader pr(*o, "profile");
    std::string kind = "power_law";
    pr.string("kind", kind);
    if (kind == "power_law") {
      s.profile.kind = ProfileKind::power_law;
    } else if (kind == "uniform") {
      s.profile.kind = ProfileKind::custom;
    } else {
      throw ConfigError("profile.kind", "unknown kind '" + kind + "' (power_law, uniform)");
    }
    pr.number("K", s.profile.K);
    pr.number("l", s.profile.l);
    pr.number("A0", s.profile.A0);
    pr.number("value", s.rho_uniform);
    pr.finish();
  }
  if (const json* o = r.object("initial")) {
    ObjectReader ir(*o, "initial");
    if (const json* f = ir.object("v")) read_field(*f, "initial.v", s.v0);
    if (const json* f = ir.object("Theta")) read_field(*f, "initial.Theta", s.Theta0);
    if (const json* f = ir.object("J")) read_field(*f, "initial.J", s.J0);
    ir.finish();
  }
  if (const json* o = r.object("grid")) {
    ObjectReader gr(*o, "grid");
    gr.number("r_trunc", s.r_trunc);
    gr.integer("N", s.N);
    gr.finish();
  }
  if (const json* o = r.object("solver")) {
    ObjectReader sr(*o, "solver");
    sr.number("dt", s.solver.dt);
    sr.number("picard_tol", s.solver.picard_tol);
    sr.integer("picard_max", s.solver.picard_max);
    sr.number("newton_tol", s.solver.newton_tol);
    sr.integer("newton_max", s.solver.newton_max);
    sr.number("J_floor", s.solver.J_floor);
    sr.number("density_floor_eps", s.solver.density_floor_eps);
    sr.number("tol_neg", s.solver.tol_neg);
    sr.integer("max_halvings", s.solver.max_halvings);
    sr.finish();
  }
  if (const json* o = r.object("output")) {
    ObjectReader orr(*o, "output");
    orr.string("dir", s.out_dir);
    orr.integer("snapshot_every", s.snapshot_every);
    orr.finish();
  }
  r.integer("diag_every", s.diag_every);
  r.number("t_end", s.t_end);
  r.integer("seed", s.seed);
  if (const json* o = r.object("extend")) {
    ObjectReader er(*o, "extend");
    er.integer("segments", s.segments);
    er.number("margin", s.margin);
    er.finish();
  }
  if (const json* o = r.object("sweep")) {
    ObjectReader wr(*o, "sweep");
    wr.string("param", s.sweep.param);
    if (const json* vals = wr.object("values")) {
      if (!vals->is_array()) throw ConfigError("sweep.values", "expected an array of numbers");
      for (std::size_t i = 0; i < vals->size(); ++i) {
        if (!(*vals)[i].is_number()) throw ConfigError("sweep.values[" + std::to_string(i) + "]", "expected a number");
        s.sweep.values.push_back((*vals)[i].get<double>());
      }
    }
    wr.integer("workers", s.sweep.workers);
    wr.finish();
  }
  r.finish();
  if (!(s.margin > 0.0 && s.margin < 1.0)) throw ConfigError("extend.margin", "must lie in (0,1)");
  validate_scenario(s);
  return s;
}

std::string echo_scenario(const Scenario& s) {
  ordered o;
  o["p"] = s.params.p;
  o["q"] = s.params.q;
  o["R"] = s.params.R;
  o["alpha"] = s.params.alpha;
  o["eps_reg"] = s.params.eps_reg;
  o["non_strict"] = !s.params.strict_mode;
  ordered prof;
  prof["kind"] = s.profile.kind == ProfileKind::power_law ? "power_law" : "uniform";
  prof["K"] = s.profile.K;
  prof["l"] = s.profile.l;
  prof["A0"] = s.profile.A0;
  prof["value"] = s.rho_uniform;
  o["profile"] = prof;
  ordered init;
  init["v"] = field_json(s.v0);
  init["Theta"] = field_json(s.Theta0);
  init["J"] = field_json(s.J0);
  o["initial"] = init;
  o["grid"] = ordered{{"r_trunc", s.r_trunc}, {"N", s.N}};
  ordered sol;
  sol["dt"] = s.solver.dt;
  sol["picard_tol"] = s.solver.picard_tol;
  sol["picard_max"] = s.solver.picard_max;
  sol["newton_tol"] = s.solver.newton_tol;
  sol["newton_max"] = s.solver.newton_max;
  sol["J_floor"] = s.solver.J_floor;
  sol["density_floor_eps"] = s.solver.density_floor_eps;
  sol["tol_neg"] = s.solver.tol_neg;
  sol["max_halvings"] = s.solver.max_halvings;
  o["solver"] = sol;
  o["output"] = ordered{{"dir", s.out_dir}, {"snapshot_every", s.snapshot_every}};
  o["diag_every"] = s.diag_every;
  o["t_end"] = s.t_end;
  o["seed"] = s.seed;
  o["extend"] = ordered{{"segments", s.segments}, {"margin", s.margin}};
  ordered sw;
  sw["param"] = s.sweep.param;
  sw["values"] = s.sweep.values;
  sw["workers"] = s.sweep.workers;
  o["sweep"] = sw;
  return o.dump(2);
}

std::string scenario_hash(const Scenario& s) {
  const std::string text = echo_scenario(s);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Field sample_field(const FieldSpec& f, const Grid& g, std::uint64_t seed) {
  const Field& y = g.nodes;
  if (f.family == "constant") return Field::Constant(g.N, f.value);
  if (f.family == "gaussian") return f.offset + f.amplitude * (-((y - f.center) / f.width).square()).exp();
  if (f.family == "random_bumps") {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> pos(-f.spread, f.spread), height(0.0, 1.0);
    Field out = Field::Constant(g.N, f.offset);
    for (int k = 0; k < f.count; ++k) {
      const double c = pos(gen), a = f.amplitude * height(gen);
      out += a * (-((y - c) / f.width).square()).exp();
    }
    return out;
  }
  throw ConfigError("initial", "unknown family '" + f.family + "'");
}

InitialData build_initial_data(const Scenario& s) {
  const Grid g = build_grid(s.r_trunc, s.N);
  Field rho0;
  if (s.profile.kind == ProfileKind::power_law) {
    rho0 = build_power_law_profile(s.profile.K, s.profile.l, s.profile.A0, g, s.params).rho0;
  } else {
    rho0 = Field::Constant(g.N, s.rho_uniform);
  }
  // Distinct streams for the two random fields.
  const Field v0 = sample_field(s.v0, g, s.seed);
  const Field T0 = sample_field(s.Theta0, g, s.seed + 1);
  const Field J0 = sample_field(s.J0, g, s.seed + 2);
  InitialData init;
  try {
    init = make_initial_data(g, rho0, J0, v0, T0, s.profile);
  } catch (const DomainError& e) {
    throw PhysicsError(std::string("initial data: ") + e.what(), 0.0);
  }
  return apply_density_floor(init, s.solver.density_floor_eps);
}

}  // namespace lagflow
