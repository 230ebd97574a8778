#include "cnls/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace cnls::cli {

ConfigError::ConfigError(const std::string& source, std::size_t line, const std::string& key,
                         const std::string& message)
    : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string()) +
                         (key.empty() ? std::string() : ": " + key) + ": " + message),
      line_(line),
      key_(key) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

struct Entry {
  std::string value;
  std::size_t line;
};

class Parser {
public:
  Parser(std::istream& in, std::string source) : source_(std::move(source)) { read(in); }

  RunConfig build() {
    RunConfig cfg;
    check_keys();

    cfg.n = count(required("grid", "n"));
    cfg.length = real(required("grid", "length"));
    try {
      (void)Grid(cfg.n, cfg.length);
    } catch (const std::exception& e) {
      fail(lookup("grid", "n"), "grid.n", e.what());
    }

    const Located p = required("coupling", "p");
    cfg.p = real(p);
    if (!(cfg.p >= 2.0 && cfg.p < 3.0)) fail(p, "coupling.p", "p must lie in [2, 3)");
    const Located a = required("coupling", "a");
    cfg.a = matrix(a);
    try {
      (void)CouplingModel(cfg.a, cfg.p);
    } catch (const std::exception& e) {
      fail(a, "coupling.a", e.what());
    }

    const Located r = required("masses", "r");
    const double rv = real(r), sv = real(required("masses", "s")), tv = real(required("masses", "t"));
    try {
      cfg.masses = MassTriple(rv, sv, tv);
    } catch (const std::exception& e) {
      fail(r, "masses", e.what());
    }

    solver(cfg);
    if (has_section("evolution")) cfg.evolution = evolution();
    if (has_section("stability")) cfg.stability = stability();
    for (const Entry& e : all("subadd", "split")) cfg.splits.push_back(split({e.value, e.line, "subadd.split"}));
    output(cfg.output);
    return cfg;
  }

private:
  struct Located {
    std::string value;
    std::size_t line = 0;
    std::string key;
  };

  [[noreturn]] void fail(std::size_t line, const std::string& key, const std::string& msg) const {
    throw ConfigError(source_, line, key, msg);
  }
  [[noreturn]] void fail(const Located& at, const std::string& key, const std::string& msg) const {
    fail(at.line, key, msg);
  }

  void read(std::istream& in) {
    std::string section;
    std::size_t lineno = 0;
    for (std::string raw; std::getline(in, raw);) {
      ++lineno;
      std::string line = trim(raw.substr(0, raw.find('#')));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail(lineno, "", "malformed section header");
        section = trim(line.substr(1, line.size() - 2));
        sections_[section];
        section_lines_[section] = lineno;
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail(lineno, "", "expected key = value");
      if (section.empty()) fail(lineno, "", "key outside any section");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) fail(lineno, "", "empty key");
      auto& bucket = sections_[section][key];
      if (!bucket.empty() && !(section == "subadd" && key == "split"))
        fail(lineno, section + "." + key, "duplicate key (first set on line " + std::to_string(bucket.front().line) + ")");
      bucket.push_back({value, lineno});
    }
  }

  void check_keys() const {
    static const std::map<std::string, std::vector<std::string>> allowed = {
        {"grid", {"n", "length"}},
        {"coupling", {"p", "a"}},
        {"masses", {"r", "s", "t"}},
        {"solver", {"tau", "max_iters", "residual_tol", "energy_tol", "rearrange_every", "seed", "init", "init_file",
                    "init_noise", "scheme", "refine", "check_every"}},
        {"evolution", {"T", "dt", "snapshot_every", "record_every", "profile"}},
        {"stability", {"kind", "delta", "eps", "seeds", "sample_every"}},
        {"subadd", {"split"}},
        {"output", {"dir", "formats"}},
    };
    for (const auto& [sec, entries] : sections_) {
      auto it = allowed.find(sec);
      if (it == allowed.end()) fail(section_lines_.at(sec), sec, "unknown section");
      for (const auto& [key, list] : entries)
        if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
          fail(list.front().line, sec + "." + key, "unknown key");
    }
  }

  bool has_section(const std::string& s) const { return sections_.count(s) != 0; }

  std::optional<Located> optional(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return Located{k->second.front().value, k->second.front().line, section + "." + key};
  }

  Located required(const std::string& section, const std::string& key) const {
    if (auto v = optional(section, key)) return *v;
    const auto s = section_lines_.find(section);
    fail(s == section_lines_.end() ? 0 : s->second, section + "." + key, "required key is missing");
  }

  std::size_t lookup(const std::string& section, const std::string& key) const {
    auto v = optional(section, key);
    return v ? v->line : 0;
  }

  std::vector<Entry> all(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return {};
    auto k = s->second.find(key);
    return k == s->second.end() ? std::vector<Entry>{} : k->second;
  }

  double real(const Located& v) const { return real(v.value, v); }

  double real(const std::string& text, const Located& at) const {
    double out = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out)) fail(at, at.key, "not a finite number: '" + text + "'");
    return out;
  }

  std::uint64_t integer(const std::string& text, const Located& at) const {
    std::uint64_t out = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    if (ec != std::errc() || ptr != end) fail(at, at.key, "not a non-negative integer: '" + text + "'");
    return out;
  }

  std::size_t count(const Located& v) const { return static_cast<std::size_t>(integer(v.value, v)); }

  bool boolean(const Located& v) const {
    if (v.value == "true" || v.value == "on" || v.value == "1") return true;
    if (v.value == "false" || v.value == "off" || v.value == "0") return false;
    fail(v, v.key, "expected true or false");
  }

  CouplingModel::Matrix matrix(const Located& v) const {
    CouplingModel::Matrix m{};
    std::istringstream rows(v.value);
    std::size_t i = 0;
    for (std::string row; std::getline(rows, row, ';'); ++i) {
      const auto cells = split_ws(row);
      if (i >= kComponents || cells.size() != kComponents) fail(v, v.key, "expected three rows of three numbers");
      for (std::size_t j = 0; j < kComponents; ++j) m[i][j] = real(cells[j], v);
    }
    if (i != kComponents) fail(v, v.key, "expected three rows of three numbers");
    return m;
  }

  MassSplit split(const Located& v) const {
    const Located at{v.value, v.line, "subadd.split"};
    const auto bar = v.value.find('|');
    if (bar == std::string::npos) fail(at, at.key, "expected 'r1 s1 t1 | r2 s2 t2'");
    const auto first = split_ws(v.value.substr(0, bar));
    const auto second = split_ws(v.value.substr(bar + 1));
    if (first.size() != kComponents || second.size() != kComponents)
      fail(at, at.key, "expected 'r1 s1 t1 | r2 s2 t2'");
    MassSplit out;
    for (std::size_t j = 0; j < kComponents; ++j) {
      out.first[j] = real(first[j], at);
      out.second[j] = real(second[j], at);
      if (out.first[j] < 0.0 || out.second[j] < 0.0) fail(at, at.key, "masses must be non-negative");
    }
    return out;
  }

  void solver(RunConfig& cfg) const {
    SolverConfig& s = cfg.solver;
    if (auto v = optional("solver", "tau")) s.tau = real(*v);
    if (auto v = optional("solver", "max_iters")) s.max_iters = count(*v);
    if (auto v = optional("solver", "residual_tol")) s.residual_tol = real(*v);
    if (auto v = optional("solver", "energy_tol")) s.energy_tol = real(*v);
    if (auto v = optional("solver", "rearrange_every")) s.rearrange_every = v->value == "off" ? 0 : count(*v);
    if (auto v = optional("solver", "seed")) s.seed = integer(v->value, *v);
    if (auto v = optional("solver", "init_noise")) s.init_noise = real(*v);
    if (auto v = optional("solver", "check_every")) s.check_every = count(*v);
    if (auto v = optional("solver", "refine")) cfg.refine = boolean(*v);
    if (auto v = optional("solver", "init")) {
      if (v->value == "gaussian_bumps") s.init = InitKind::gaussian_bumps;
      else if (v->value == "sech_guess") s.init = InitKind::sech_guess;
      else if (v->value == "supplied") s.init = InitKind::supplied;
      else fail(*v, v->key, "expected gaussian_bumps, sech_guess or supplied");
    }
    if (auto v = optional("solver", "scheme")) {
      if (v->value == "preconditioned") s.scheme = FlowScheme::preconditioned;
      else if (v->value == "explicit_euler") s.scheme = FlowScheme::explicit_euler;
      else fail(*v, v->key, "expected preconditioned or explicit_euler");
    }
    if (auto v = optional("solver", "init_file")) cfg.init_file = v->value;
    if (s.init == InitKind::supplied && cfg.init_file.empty())
      fail(lookup("solver", "init"), "solver.init_file", "required when init = supplied");
    try {
      SolverConfig probe = s;
      if (probe.init == InitKind::supplied) probe.initial = State(Grid(cfg.n, cfg.length));
      probe.validate();
    } catch (const std::exception& e) {
      fail(section_lines_.count("solver") ? section_lines_.at("solver") : 0, "solver", e.what());
    }
  }

  EvolutionSection evolution() const {
    EvolutionSection e;
    const Located T = required("evolution", "T");
    e.T = real(T);
    if (e.T < 0.0) fail(T, T.key, "T must be non-negative");
    const Located dt = required("evolution", "dt");
    e.dt = real(dt);
    if (!(e.dt > 0.0)) fail(dt, dt.key, "dt must be positive");
    if (auto v = optional("evolution", "snapshot_every")) e.snapshot_every = count(*v);
    if (auto v = optional("evolution", "record_every")) {
      e.record_every = count(*v);
      if (e.record_every == 0) fail(*v, v->key, "record_every must be positive");
    }
    if (auto v = optional("evolution", "profile")) e.profile = v->value;
    return e;
  }

  StabilitySection stability() const {
    StabilitySection s;
    if (auto v = optional("stability", "kind")) {
      if (v->value == "random_h1") s.kind = PerturbationKind::random_h1;
      else if (v->value == "mass_preserving_random") s.kind = PerturbationKind::mass_preserving_random;
      else if (v->value == "component_tilt") s.kind = PerturbationKind::component_tilt;
      else fail(*v, v->key, "expected random_h1, mass_preserving_random or component_tilt");
    }
    const Located delta = required("stability", "delta");
    s.delta = real(delta);
    if (s.delta < 0.0) fail(delta, delta.key, "delta must be non-negative");
    if (auto v = optional("stability", "eps")) s.eps = real(*v);
    const Located seeds = required("stability", "seeds");
    for (const auto& w : split_ws(seeds.value)) s.seeds.push_back(integer(w, seeds));
    if (s.seeds.empty()) fail(seeds, seeds.key, "at least one seed is required");
    if (auto v = optional("stability", "sample_every")) {
      s.sample_every = count(*v);
      if (s.sample_every == 0) fail(*v, v->key, "sample_every must be positive");
    }
    return s;
  }

  void output(OutputSection& o) const {
    if (auto v = optional("output", "dir")) o.dir = v->value;
    if (auto v = optional("output", "formats")) {
      o.json = o.csv = false;
      for (const auto& w : split_ws(v->value)) {
        if (w == "json") o.json = true;
        else if (w == "csv") o.csv = true;
        else fail(*v, v->key, "unknown format '" + w + "' (json, csv)");
      }
    }
  }

  std::string source_;
  std::map<std::string, std::map<std::string, std::vector<Entry>>> sections_;
  std::map<std::string, std::size_t> section_lines_;
};

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& source) { return Parser(in, source).build(); }

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "", "cannot open configuration file");
  return parse_config(in, path.string());
}

}  // namespace cnls::cli
