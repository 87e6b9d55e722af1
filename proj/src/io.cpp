#include "lagflow/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lagflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_row(std::ostream& out, const std::vector<double>& values) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out << ',';
    out << format_double(values[k]);
  }
  out << '\n';
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string snapshot_name(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snap_%.9f.csv", t);
  return buf;
}

void write_snapshot(const std::filesystem::path& path, const State& s, const Grid& g, const std::string& hash) {
  auto out = open_out(path);
  out << "# lagflow snapshot config_hash=" << hash << " t=" << format_double(s.t) << '\n';
  out << "y,J,rho,v,Theta\n";
  for (Eigen::Index i = 0; i < g.N; ++i) write_row(out, {g.nodes(i), s.J(i), s.rho(i), s.v(i), s.Theta(i)});
}

State read_snapshot(const std::filesystem::path& path, const Grid& g) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  State s;
  if (!std::getline(in, line) || line.rfind("# lagflow snapshot", 0) != 0)
    throw Error(path.filename().string() + ": missing snapshot header");
  const auto tpos = line.find(" t=");
  if (tpos == std::string::npos) throw Error(path.filename().string() + ": header has no time");
  try {
    s.t = std::stod(line.substr(tpos + 3));
  } catch (const std::exception&) {
    throw Error(path.filename().string() + ": unreadable time in header");
  }
  if (!std::getline(in, line) || line != "y,J,rho,v,Theta")
    throw Error(path.filename().string() + ": unexpected column header");

  s.J.resize(g.N);
  s.rho.resize(g.N);
  s.v.resize(g.N);
  s.Theta.resize(g.N);
  Eigen::Index i = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (i >= g.N) throw Error(path.filename().string() + ": more rows than grid nodes");
    double vals[5];
    std::stringstream ss(line);
    std::string cell;
    for (int c = 0; c < 5; ++c) {
      if (!std::getline(ss, cell, ',')) throw Error(path.filename().string() + ": short row " + std::to_string(i));
      char* end = nullptr;
      vals[c] = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw Error(path.filename().string() + ": bad number '" + cell + "' in row " + std::to_string(i));
    }
    if (std::abs(vals[0] - g.nodes(i)) > 1e-9 * std::max(1.0, g.r_trunc))
      throw Error(path.filename().string() + ": node " + std::to_string(i) + " does not match the grid");
    s.J(i) = vals[1];
    s.rho(i) = vals[2];
    s.v(i) = vals[3];
    s.Theta(i) = vals[4];
    ++i;
  }
  if (i != g.N) throw Error(path.filename().string() + ": expected " + std::to_string(g.N) + " rows");
  return s;
}

std::vector<std::string> diagnostics_columns() {
  std::vector<std::string> cols = {"t", "E", "D"};
  for (int k = 0; k < 8; ++k) cols.push_back("E" + std::to_string(k + 1));
  for (const char* c : {"inf_J", "sup_J", "theta_min", "mass_residual", "energy_drift", "margin", "ratio_E",
                        "ratio_supJ", "ratio_infJ"})
    cols.emplace_back(c);
  return cols;
}

void write_diagnostics(const std::filesystem::path& path, const Trajectory& tr, const InitialData& init,
                       const FluidParams& prm, const std::string& hash) {
  auto out = open_out(path);
  out << "# lagflow diagnostics config_hash=" << hash << '\n';
  const auto cols = diagnostics_columns();
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << '\n';
  if (tr.snapshots.empty()) return;

  // Bound ratios exist only while the envelope is defined at the first snapshot.
  std::optional<BoundAudit> audit;
  try {
    audit = check_bounds(tr.snapshots, init, prm);
  } catch (const DomainError&) {
  }

  const Field m0 = init.J0 * init.rho0;
  const double E0 = total_energy(tr.snapshots.front(), init);
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    const State& s = tr.snapshots[k];
    const EnergyReport e = energy_functional(s, init, prm);
    const double D = k > 0 ? dissipation_functional(s, tr.snapshots[k - 1], init, prm) : kNaN;
    const double W = k < tr.boundary_work.size() ? tr.boundary_work[k] : 0.0;
    std::vector<double> row = {s.t, e.E, D};
    row.insert(row.end(), e.components.begin(), e.components.end());
    row.push_back(s.J.minCoeff());
    row.push_back(s.J.maxCoeff());
    row.push_back(s.Theta.minCoeff());
    row.push_back((s.J * s.rho - m0).abs().maxCoeff() / m0.maxCoeff());
    row.push_back(std::abs(total_energy(s, init) - E0 - W) / std::abs(E0));
    if (audit && audit->rows[k].in_scope) {
      const auto& a = audit->rows[k];
      row.insert(row.end(), {a.margin, a.ratio_E, a.ratio_supJ, a.ratio_infJ});
    } else {
      row.insert(row.end(), {audit ? audit->rows[k].margin : kNaN, kNaN, kNaN, kNaN});
    }
    write_row(out, row);
  }
}

void write_schedule(const std::filesystem::path& path, const Schedule& sch, const std::string& hash) {
  using ordered = nlohmann::ordered_json;
  ordered o;
  o["config_hash"] = hash;
  ordered segs = ordered::array();
  for (const auto& s : sch.segments) {
    ordered j;
    j["T_start"] = s.T_start;
    j["T_end"] = s.T_end;
    j["H_start"] = s.H_start;
    j["G"] = s.G;
    j["margin_end"] = s.margin_end;
    j["delta"] = s.delta;
    j["eta"] = s.eta;
    j["step_lower_bound"] = s.step_lower_bound;
    j["completed"] = s.completed;
    segs.push_back(j);
  }
  o["segments"] = segs;
  o["cumulative_time"] = sch.cumulative_time;
  ordered sums = ordered::array();
  for (const auto& [L, v] : sch.divergence_partial_sums) sums.push_back(ordered{{"Lambda", L}, {"value", v}});
  o["divergence_partial_sums"] = sums;
  o["lower_bound_partial_sums"] = sch.lower_bound_partial_sums;
  if (sch.failure) {
    o["failure"] = ordered{{"kind", sch.failure->kind}, {"message", sch.failure->message}, {"t", sch.failure->t}};
  } else {
    o["failure"] = nullptr;
  }
  auto out = open_out(path);
  out << o.dump(2) << '\n';
}

}  // namespace lagflow
