#include "cnls/cli/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cnls::cli {

namespace {

constexpr const char* kFieldColumns = "re_u1,im_u1,re_u2,im_u2,re_u3,im_u3";

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

void write_row(std::ostream& out, const State& s, std::size_t m) {
  for (std::size_t j = 0; j < kComponents; ++j)
    out << ',' << format_number(s[j][m].real()) << ',' << format_number(s[j][m].imag());
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_profile_csv(const std::filesystem::path& path, const State& s) {
  std::ofstream out = open_out(path);
  out << "x," << kFieldColumns << '\n';
  for (std::size_t m = 0; m < s.grid().size(); ++m) {
    out << format_number(s.grid().node(m));
    write_row(out, s, m);
    out << '\n';
  }
}

State read_profile_csv(const std::filesystem::path& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open profile " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != std::string("x,") + kFieldColumns)
    throw InputError(path.string() + ": expected header 'x," + kFieldColumns + "'");

  State s(grid);
  std::size_t m = 0;
  for (std::size_t row = 2; std::getline(in, line); ++row) {
    if (line.empty()) continue;
    std::array<double, 2 * kComponents + 1> v{};
    std::istringstream cells(line);
    std::string cell;
    std::size_t c = 0;
    for (; c < v.size() && std::getline(cells, cell, ','); ++c) {
      char* end = nullptr;
      v[c] = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw InputError(path.string() + ":" + std::to_string(row) + ": bad number '" + cell + "'");
    }
    if (c != v.size() || std::getline(cells, cell, ','))
      throw InputError(path.string() + ":" + std::to_string(row) + ": expected 7 columns");
    if (m >= grid.size()) throw GridMismatch(path.string() + ": more rows than grid nodes");
    if (std::abs(v[0] - grid.node(m)) > 1e-9 * std::max(1.0, grid.length()))
      throw GridMismatch(path.string() + ":" + std::to_string(row) + ": node " + format_number(v[0]) +
                         " does not match the configured grid");
    for (std::size_t j = 0; j < kComponents; ++j) s[j][m] = cplx(v[1 + 2 * j], v[2 + 2 * j]);
    ++m;
  }
  if (m != grid.size())
    throw GridMismatch(path.string() + ": " + std::to_string(m) + " rows for a grid of " +
                       std::to_string(grid.size()) + " nodes");
  return s;
}

void write_trace_csv(const std::filesystem::path& path, const EvolutionTrace& trace) {
  std::ofstream out = open_out(path);
  const bool orbital = trace.orbital_distance.size() == trace.times.size() && !trace.times.empty();
  out << "t,energy_drift,mass_drift_u1,mass_drift_u2,mass_drift_u3" << (orbital ? ",orbital_distance" : "") << '\n';
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    out << format_number(trace.times[i]) << ',' << format_number(trace.energy_drift[i]);
    for (const auto& d : trace.mass_drifts) out << ',' << format_number(d[i]);
    if (orbital) out << ',' << format_number(trace.orbital_distance[i]);
    out << '\n';
  }
}

void write_snapshots_csv(const std::filesystem::path& path, const EvolutionTrace& trace) {
  std::ofstream out = open_out(path);
  out << "t,x," << kFieldColumns << '\n';
  for (std::size_t i = 0; i < trace.snapshots.size(); ++i) {
    const State& s = trace.snapshots[i];
    for (std::size_t m = 0; m < s.grid().size(); ++m) {
      out << format_number(trace.snapshot_times[i]) << ',' << format_number(s.grid().node(m));
      write_row(out, s, m);
      out << '\n';
    }
  }
}

nlohmann::ordered_json groundstate_json(const GroundState& g, const CouplingModel& model) {
  nlohmann::ordered_json j;
  j["lambda"] = g.lambda;
  j["omega"] = g.multipliers.w;
  j["residual"] = g.residual;
  j["iterations"] = g.iterations;
  j["masses"] = {g.masses_achieved.r, g.masses_achieved.s, g.masses_achieved.t};
  j["grid"] = {{"n", g.profile.grid().size()}, {"length", g.profile.grid().length()}};
  j["coupling"] = {{"a", model.matrix()}, {"p", model.p()}};
  return j;
}

nlohmann::ordered_json stability_json(const StabilityReport& r) {
  nlohmann::ordered_json j;
  j["seed"] = r.seed;
  j["delta"] = r.delta;
  j["eps"] = r.eps;
  j["initial_distance"] = r.initial_distance;
  j["sup_distance"] = r.sup_distance;
  j["verdict"] = to_string(r.verdict);
  j["representative_switch_suspected"] = r.representative_switch_suspected;
  j["max_energy_drift"] = r.trace.max_energy_drift();
  j["max_mass_drift"] = r.trace.max_mass_drift();
  j["times_sampled"] = r.times_sampled;
  j["orbital_distance"] = r.trace.orbital_distance;
  return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
}

}  // namespace cnls::cli
