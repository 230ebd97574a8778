#include "cnls/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "cnls/cli/io.hpp"
#include "cnls/tolerances.hpp"

#ifndef CNLS_VERSION
#define CNLS_VERSION "unknown"
#endif

namespace cnls::cli {

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

// Timestamps live here so that every other output is reproducible.
class Metadata {
public:
  Metadata(std::string command, const Options& opts) : command_(std::move(command)), opts_(opts), started_(utc_now()) {}

  void write(const std::filesystem::path& dir, int exit_code) const {
    nlohmann::ordered_json j;
    j["command"] = command_;
    j["version"] = CNLS_VERSION;
    j["config"] = opts_.config_path;
    j["started"] = started_;
    j["finished"] = utc_now();
    j["exit_code"] = exit_code;
    write_json(dir / "metadata.json", j);
  }

private:
  std::string command_;
  const Options& opts_;
  std::string started_;
};

std::filesystem::path out_dir(const RunConfig& cfg, const Options& opts) {
  auto dir = opts.out.empty() ? cfg.output.dir : opts.out;
  std::filesystem::create_directories(dir);
  return dir;
}

void apply_overrides(RunConfig& cfg, const Options& opts) {
  if (!opts.seed) return;
  cfg.solver.seed = *opts.seed;
  if (cfg.stability) cfg.stability->seeds = {*opts.seed};
}

GroundState solve(const RunConfig& cfg, std::ostream& log) {
  const Grid grid = cfg.grid();
  SolverConfig solver = cfg.solver;
  if (solver.init == InitKind::supplied) solver.initial = read_profile_csv(cfg.init_file, grid);
  const CouplingModel model = cfg.model();
  GroundState g = cfg.refine ? solve_ground_state(model, cfg.masses, grid, solver) : minimize(model, cfg.masses, grid, solver);
  log << "ground state: lambda " << format_number(g.lambda) << ", residual " << format_number(g.residual) << ", "
      << g.iterations << " iterations\n";
  return g;
}

// The state to evolve or perturb: a supplied profile, or a fresh ground state.
GroundState starting_state(const RunConfig& cfg, const Options& opts, std::ostream& log) {
  std::string profile = opts.profile;
  if (profile.empty() && cfg.evolution) profile = cfg.evolution->profile;
  if (profile.empty()) return solve(cfg, log);
  const CouplingModel model = cfg.model();
  GroundState g{read_profile_csv(profile, cfg.grid()), {}, 0.0, 0.0, 0, {}, {}};
  g.lambda = energy(g.profile, model);
  const auto q = masses(g.profile);
  // Diagnostics only; an overflowing profile is still handed to the integrator,
  // which reports the blow-up.
  if (const double total = q[0] + q[1] + q[2]; std::isfinite(total) && total > 0.0) {
    g.masses_achieved = MassTriple(q[0], q[1], q[2]);
    g.multipliers = lagrange_multipliers(g.profile, model);
    g.residual = el_residual(g.profile, g.multipliers, model);
  }
  log << "loaded profile " << profile << '\n';
  return g;
}

const EvolutionSection& need_evolution(const RunConfig& cfg) {
  if (!cfg.evolution) throw ConfigError("<config>", 0, "evolution", "section [evolution] with T and dt is required");
  return *cfg.evolution;
}

struct NullBuffer : std::streambuf {
  int overflow(int c) override { return c; }
};

}  // namespace

int cmd_solve(RunConfig cfg, const Options& opts, std::ostream& log) {
  apply_overrides(cfg, opts);
  const Metadata meta("solve", opts);
  const auto dir = out_dir(cfg, opts);
  const GroundState g = solve(cfg, log);
  if (cfg.output.json) write_json(dir / "groundstate.json", groundstate_json(g, cfg.model()));
  if (cfg.output.csv) write_profile_csv(dir / "profile.csv", g.profile);
  meta.write(dir, kExitPass);
  return kExitPass;
}

int cmd_evolve(RunConfig cfg, const Options& opts, std::ostream& log) {
  apply_overrides(cfg, opts);
  const EvolutionSection& ev = need_evolution(cfg);
  const Metadata meta("evolve", opts);
  const auto dir = out_dir(cfg, opts);
  const GroundState g = starting_state(cfg, opts, log);

  EvolveOptions eo;
  eo.snapshot_every = ev.snapshot_every;
  eo.record_every = ev.record_every;
  const CouplingModel model = cfg.model();
  auto emit = [&](const EvolutionTrace& trace, const std::string& status) {
    if (cfg.output.csv) {
      write_trace_csv(dir / "trace.csv", trace);
      if (!trace.snapshots.empty()) write_snapshots_csv(dir / "snapshots.csv", trace);
    }
    if (cfg.output.json) {
      nlohmann::ordered_json j;
      j["status"] = status;
      j["T"] = ev.T;
      j["dt"] = ev.dt;
      j["records"] = trace.times.size();
      j["final_time"] = trace.times.empty() ? 0.0 : trace.times.back();
      j["max_energy_drift"] = trace.max_energy_drift();
      j["max_mass_drift"] = trace.max_mass_drift();
      write_json(dir / "evolution.json", j);
    }
  };
  try {
    Evolution result = evolve_state(g.profile, ev.T, ev.dt, model, eo);
    emit(result.trace, "completed");
    if (cfg.output.csv) write_profile_csv(dir / "final.csv", result.final_state);
    log << "evolved to T = " << format_number(ev.T) << ": max energy drift "
        << format_number(result.trace.max_energy_drift()) << ", max mass drift "
        << format_number(result.trace.max_mass_drift()) << '\n';
  } catch (const BlowUp& e) {
    emit(e.partial(), "blow_up");
    meta.write(dir, kExitBlowUp);
    throw;
  }
  meta.write(dir, kExitPass);
  return kExitPass;
}

int cmd_stability(RunConfig cfg, const Options& opts, std::ostream& log) {
  apply_overrides(cfg, opts);
  const EvolutionSection& ev = need_evolution(cfg);
  if (!cfg.stability) throw ConfigError("<config>", 0, "stability", "section [stability] is required");
  const StabilitySection& st = *cfg.stability;
  const Metadata meta("stability", opts);
  const auto dir = out_dir(cfg, opts);
  const GroundState g = starting_state(cfg, opts, log);

  StabilityConfig sc;
  sc.kind = st.kind;
  sc.delta = st.delta;
  sc.eps = st.eps;
  sc.T = ev.T;
  sc.dt = ev.dt;
  sc.sample_every = st.sample_every;
  const auto reports = stability_ensemble(g, cfg.model(), sc, st.seeds);

  nlohmann::ordered_json summary;
  summary["kind"] = to_string(st.kind);
  summary["delta"] = st.delta;
  summary["eps"] = reports.front().eps;
  summary["T"] = ev.T;
  summary["dt"] = ev.dt;
  summary["runs"] = nlohmann::ordered_json::array();
  int code = kExitPass;
  for (const auto& r : reports) {
    const std::string tag = "seed" + std::to_string(r.seed);
    if (cfg.output.json) write_json(dir / ("report_" + tag + ".json"), stability_json(r));
    if (cfg.output.csv) write_trace_csv(dir / ("trace_" + tag + ".csv"), r.trace);
    summary["runs"].push_back({{"seed", r.seed}, {"verdict", to_string(r.verdict)}, {"sup_distance", r.sup_distance}});
    log << tag << ": " << to_string(r.verdict) << ", sup distance " << format_number(r.sup_distance) << '\n';
    if (r.verdict == Verdict::blow_up) code = kExitBlowUp;
    else if (r.verdict == Verdict::escaped && code == kExitPass) code = kExitValidation;
  }
  summary["all_bounded"] = code == kExitPass;
  if (cfg.output.json) write_json(dir / "summary.json", summary);
  meta.write(dir, code);
  return code;
}

int cmd_subadd(RunConfig cfg, const Options& opts, std::ostream& log) {
  apply_overrides(cfg, opts);
  if (cfg.splits.empty()) throw ConfigError("<config>", 0, "subadd.split", "at least one split is required");
  const Metadata meta("subadd", opts);
  const auto dir = out_dir(cfg, opts);
  const CouplingModel model = cfg.model();
  const Grid grid = cfg.grid();

  std::ostringstream csv;
  csv << "split,lambda_total,lambda_first,lambda_second,margin,tolerance,inconclusive\n";
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  int code = kExitPass;
  for (const MassSplit& split : cfg.splits) {
    std::ostringstream label;
    for (std::size_t j = 0; j < kComponents; ++j) label << (j ? " " : "") << format_number(split.first[j]);
    label << " |";
    for (std::size_t j = 0; j < kComponents; ++j) label << ' ' << format_number(split.second[j]);
    const SubadditivityResult r = subadditivity_check(model, split, grid, cfg.solver);
    csv << label.str() << ',' << format_number(r.lambda_total) << ',' << format_number(r.lambda_first) << ','
        << format_number(r.lambda_second) << ',' << format_number(r.margin) << ',' << format_number(r.tolerance) << ','
        << (r.inconclusive ? "true" : "false") << '\n';
    rows.push_back({{"split", label.str()},
                    {"lambda_total", r.lambda_total},
                    {"lambda_first", r.lambda_first},
                    {"lambda_second", r.lambda_second},
                    {"margin", r.margin},
                    {"tolerance", r.tolerance},
                    {"inconclusive", r.inconclusive}});
    log << label.str() << ": margin " << format_number(r.margin) << (r.inconclusive ? " (inconclusive)" : "") << '\n';
    if (!r.inconclusive && r.margin > 0.0) code = kExitValidation;
  }
  if (cfg.output.csv) write_text(dir / "margins.csv", csv.str());
  if (cfg.output.json) write_json(dir / "margins.json", rows);
  meta.write(dir, code);
  return code;
}

std::vector<Check> validation_checks() {
  std::vector<Check> out;
  auto add = [&](std::string name, double value, double limit) {
    out.push_back({std::move(name), value, limit, std::isfinite(value) && value <= limit});
  };
  const Grid grid(1024, 40.0);
  const auto x = grid.nodes();

  // sech(L/2) ~ 4e-9 on this box, so the derivative is checked on the
  // periodised function sum_k sech(x + kL), which is smooth on the circle.
  Field sech(grid), periodic(grid);
  double derr = 0.0;
  std::vector<double> exact(grid.size());
  for (std::size_t m = 0; m < grid.size(); ++m) {
    sech[m] = 1.0 / std::cosh(x[m]);
    for (int image = -2; image <= 2; ++image) {
      const double y = x[m] + image * grid.length();
      periodic[m] += 1.0 / std::cosh(y);
      exact[m] -= std::tanh(y) / std::cosh(y);
    }
  }
  const Field d = spectral_derivative(periodic);
  for (std::size_t m = 0; m < grid.size(); ++m) derr = std::max(derr, std::abs(d[m] - exact[m]));
  add("sech derivative, max error", derr, tol::kDerivativeSech);

  std::vector<double> s2(grid.size()), s4(grid.size());
  for (std::size_t m = 0; m < grid.size(); ++m) {
    s2[m] = std::norm(sech[m]);
    s4[m] = s2[m] * s2[m];
  }
  add("integral of sech^2, error", std::abs(integrate(grid, s2) - 2.0), tol::kQuadratureSech);
  add("integral of sech^4, error", std::abs(integrate(grid, s4) - 4.0 / 3.0), tol::kQuadratureSech);

  // Residuals need a box on which the profile has decayed below round-off.
  const Grid wide(2048, 80.0);
  const CouplingModel one = CouplingModel::uniform(1.0, 2.0);
  const Field psi = sech_profile(1.0, 1.0, 2.0, wide);
  const State single(psi, Field(wide), Field(wide));
  add("single-component residual at w = 1", el_residual(single, Multipliers{{1.0, 1.0, 1.0}}, one),
      tol::kClosedFormResidual);
  const Field c = std::sqrt(1.0 / 3.0) * psi;
  add("equal-coupling triple residual at w = 1", el_residual(State(c, c, c), Multipliers{{1.0, 1.0, 1.0}}, one),
      tol::kClosedFormResidual);

  for (double r : {1.0, 2.0, 4.0}) {
    const Grid g(1024, 160.0 / r);
    const GroundState gs = solve_ground_state(one, MassTriple(r, 0.0, 0.0), g);
    const double exact = single_component_lambda(r);
    add("lambda(" + format_number(r) + ",0,0) vs -r^3/48, relative error", std::abs(gs.lambda - exact) / std::abs(exact),
        tol::kLambdaOracle);
  }

  // Smooth random states and directions, energy by central differences.
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> coupling(0.5, 2.0);
  const Grid small(256, 20.0);
  auto random_state = [&] {
    State s(small);
    for (std::size_t j = 0; j < kComponents; ++j) {
      const double centre = normal(rng), width = 1.0 + std::abs(normal(rng)), wave = normal(rng);
      const cplx amp(normal(rng), normal(rng));
      for (std::size_t m = 0; m < small.size(); ++m) {
        const double y = (small.node(m) - centre) / width;
        s[j][m] = amp * std::exp(-y * y) * std::polar(1.0, wave * y);
      }
    }
    return s;
  };
  double gerr = 0.0;
  for (int pair = 0; pair < 20; ++pair) {
    CouplingModel::Matrix a{};
    for (std::size_t i = 0; i < kComponents; ++i)
      for (std::size_t j = i; j < kComponents; ++j) a[i][j] = a[j][i] = coupling(rng);
    const CouplingModel model(a, pair % 2 ? 2.5 : 2.0);
    const State s = random_state();
    const State delta = random_state();
    const double eps = tol::kFiniteDifferenceStep;
    const double fd = (energy(s + cplx(eps) * delta, model) - energy(s - cplx(eps) * delta, model)) / (2.0 * eps);
    const State grad = energy_gradient(s, model);
    double analytic = 0.0;
    for (std::size_t j = 0; j < kComponents; ++j) analytic += 2.0 * l2_inner(grad[j], delta[j]).real();
    gerr = std::max(gerr, std::abs(fd - analytic) / std::abs(analytic));
  }
  add("energy gradient vs central differences, relative error", gerr, tol::kGradientFiniteDifference);
  return out;
}

int cmd_validate(const Options& opts, std::ostream& log) {
  const Metadata meta("validate", opts);
  const auto checks = validation_checks();
  bool ok = true;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const Check& c : checks) {
    log << (c.pass ? "pass  " : "FAIL  ") << c.name << ": " << format_number(c.value) << " (limit "
        << format_number(c.limit) << ")\n";
    rows.push_back({{"check", c.name}, {"value", c.value}, {"limit", c.limit}, {"pass", c.pass}});
    ok = ok && c.pass;
  }
  const int code = ok ? kExitPass : kExitValidation;
  if (!opts.out.empty()) {
    std::filesystem::create_directories(opts.out);
    write_json(opts.out / "validation.json", rows);
    meta.write(opts.out, code);
  }
  return code;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Normalized ground states of the 3-coupled NLS system", "cnls"};
  app.require_subcommand(1);
  Options opts;
  std::string out_path;
  std::uint64_t seed = 0;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", opts.config_path, "run configuration file");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "seed override for the solver and the stability ensemble");
    sub->add_flag("--quiet", opts.quiet, "suppress progress messages");
  };
  auto* solve_cmd = app.add_subcommand("solve", "compute a normalized ground state");
  common(solve_cmd, true);
  auto* evolve_cmd = app.add_subcommand("evolve", "evolve a profile with split-step Fourier");
  common(evolve_cmd, true);
  evolve_cmd->add_option("--profile", opts.profile, "profile.csv to evolve (overrides evolution.profile)");
  auto* stab_cmd = app.add_subcommand("stability", "perturb, evolve and measure orbital distance");
  common(stab_cmd, true);
  stab_cmd->add_option("--profile", opts.profile, "ground-state profile.csv to perturb");
  auto* sub_cmd = app.add_subcommand("subadd", "check strict subadditivity of lambda on mass splits");
  common(sub_cmd, true);
  auto* val_cmd = app.add_subcommand("validate", "run the built-in closed-form checks");
  common(val_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (!out_path.empty()) opts.out = out_path;
  for (auto* sub : {solve_cmd, evolve_cmd, stab_cmd, sub_cmd, val_cmd})
    if (sub->parsed() && sub->count("--seed")) opts.seed = seed;

  NullBuffer null_buffer;
  std::ostream null_stream(&null_buffer);
  std::ostream& log = opts.quiet ? null_stream : out;

  try {
    if (val_cmd->parsed()) return cmd_validate(opts, log);
    RunConfig cfg = load_config(opts.config_path);
    if (solve_cmd->parsed()) return cmd_solve(std::move(cfg), opts, log);
    if (evolve_cmd->parsed()) return cmd_evolve(std::move(cfg), opts, log);
    if (stab_cmd->parsed()) return cmd_stability(std::move(cfg), opts, log);
    return cmd_subadd(std::move(cfg), opts, log);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const GridMismatch& e) {
    err << "grid mismatch: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NonConvergence& e) {
    err << "no convergence: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const StepCollapse& e) {
    err << "no convergence: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const Divergence& e) {
    err << "no convergence: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const BlowUp& e) {
    err << "blow-up: " << e.what() << '\n';
    return kExitBlowUp;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitConfig;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"cnls"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace cnls::cli
