// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Reference values come from closed forms and direct sums in
// oracles.hpp, never from the solver under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cnls/cli/commands.hpp"
#include "cnls/cli/io.hpp"
#include "cnls/evolution.hpp"
#include "cnls/ground_state.hpp"
#include "cnls/stability.hpp"
#include "cnls/tolerances.hpp"
#include "json.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace cnls;

namespace {

struct Result {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const CouplingModel& one() {
  static const CouplingModel m = CouplingModel::uniform(1.0, 2.0);
  return m;
}

const GroundState& triple() {
  static const GroundState g = solve_ground_state(one(), MassTriple(4.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0), Grid(1024, 40.0));
  return g;
}

double max_abs_diff(const Field& a, const Field& b) {
  double d = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m) d = std::max(d, std::abs(a[m] - b[m]));
  return d;
}

// Max-norm distance between |u| and exact(x - y), minimized over whole-grid y.
template <class F>
double aligned_modulus_error(const Field& u, F&& exact) {
  const Grid& g = u.grid();
  const auto n = static_cast<std::ptrdiff_t>(g.size());
  double best = 1e300;
  for (std::ptrdiff_t q = -n / 2; q < n / 2; ++q) {
    double worst = 0.0;
    for (std::ptrdiff_t m = 0; m < n && worst < best; ++m) {
      const double x = g.node(static_cast<std::size_t>(m)) - static_cast<double>(q) * g.spacing();
      worst = std::max(worst, std::abs(std::abs(u[static_cast<std::size_t>(m)]) - exact(x)));
    }
    best = std::min(best, worst);
  }
  return best;
}

Result single_component_oracle() {
  Result v;
  const fs::path dir = fs::temp_directory_path() / ("cnls_acceptance_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  double worst_lambda = 0.0, worst_omega = 0.0, worst_profile = 0.0;
  for (double r : {1.0, 2.0, 4.0}) {
    // Box scales with the soliton width 4/r so that the tail is below 1e-16.
    const double length = 160.0 / r;
    const fs::path cfg = dir / "single.ini";
    std::ofstream(cfg) << "[grid]\nn = 1024\nlength = " << length
                       << "\n[coupling]\np = 2\na = 1 1 1; 1 1 1; 1 1 1\n[masses]\nr = " << r << "\ns = 0\nt = 0\n";
    const fs::path out = dir / ("r" + std::to_string(static_cast<int>(r)));
    std::ostringstream log, err;
    const int code = cli::run({"solve", "--quiet", "--config", cfg.string(), "--out", out.string()}, log, err);
    v.require(code == cli::kExitPass, "r=" + num(r) + " exit " + std::to_string(code) + " " + err.str());
    if (code != cli::kExitPass) continue;

    std::ifstream in(out / "groundstate.json");
    const auto j = nlohmann::json::parse(in);
    const oracle::SechSoliton sol = oracle::single_soliton(r);
    const double exact = oracle::single_lambda(r);
    const double lambda_err = std::abs(j["lambda"].get<double>() - exact) / std::abs(exact);
    const double omega_err = std::abs(j["omega"][0].get<double>() - sol.omega);
    const Grid grid(1024, length);
    const State profile = cli::read_profile_csv(out / "profile.csv", grid);
    const double profile_err =
        aligned_modulus_error(profile[0], [&](double x) { return sol.amplitude * oracle::sech(sol.kappa * x); });
    v.require(lambda_err <= tol::kLambdaOracle, "r=" + num(r) + " lambda rel err " + num(lambda_err));
    v.require(omega_err <= tol::kOmegaOracle, "r=" + num(r) + " omega err " + num(omega_err));
    v.require(profile_err <= tol::kProfileOracle, "r=" + num(r) + " profile err " + num(profile_err));
    worst_lambda = std::max(worst_lambda, lambda_err);
    worst_omega = std::max(worst_omega, omega_err);
    worst_profile = std::max(worst_profile, profile_err);
  }
  if (v.pass)
    v.detail = "r in {1,2,4}, worst lambda rel err " + num(worst_lambda) + ", omega " + num(worst_omega) + ", profile " +
               num(worst_profile);
  std::error_code ec;
  fs::remove_all(dir, ec);
  return v;
}

Result equal_coupling_triple() {
  Result v;
  const GroundState& g = triple();
  const double lambda_err = std::abs(g.lambda + 4.0 / 3.0);
  const double pair = std::max(max_abs_diff(g.profile[0], g.profile[1]), max_abs_diff(g.profile[0], g.profile[2]));
  double omega_err = 0.0;
  for (double w : g.multipliers.w) omega_err = std::max(omega_err, std::abs(w - 1.0));
  v.require(lambda_err <= tol::kLambdaOracle, "lambda err " + num(lambda_err));
  v.require(pair <= 1e-6, "pairwise difference " + num(pair));
  v.require(omega_err <= 1e-6, "omega err " + num(omega_err));
  if (v.pass) v.detail = "lambda err " + num(lambda_err) + ", pairwise " + num(pair) + ", omega " + num(omega_err);
  return v;
}

// Coarse solve to read off the multipliers, then a full solve on a grid sized
// for them.
GroundState adapted_solve(const CouplingModel& model, const MassTriple& m) {
  SolverConfig coarse;
  coarse.residual_tol = 1e-6;
  coarse.energy_tol = 1e-8;
  const GroundState first = solve_ground_state(model, m, Grid(1024, 40.0), coarse);
  return solve_ground_state(model, m, adapted_grid(first.multipliers, model.p()));
}

Result structural_signs() {
  Result v;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> um(0.5, 3.0);
  double worst_residual = 0.0, worst_phase = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double p = k % 2 ? 2.5 : 2.0;
    const CouplingModel model = oracle::random_model(rng, p);
    const MassTriple m(um(rng), um(rng), um(rng));
    const std::string tag = "case " + std::to_string(k) + ": ";
    std::optional<GroundState> solved;
    try {
      solved = adapted_solve(model, m);
    } catch (const Error& e) {
      v.require(false, tag + e.what());
      continue;
    }
    const GroundState& g = *solved;
    v.require(g.lambda < 0.0, tag + "lambda " + num(g.lambda));
    v.require(g.residual <= tol::kSweepResidual, tag + "residual " + num(g.residual));
    worst_residual = std::max(worst_residual, g.residual);
    const State pos = positive_representative(g.profile);
    for (std::size_t j = 0; j < kComponents; ++j) {
      v.require(g.multipliers[j] > 0.0, tag + "omega " + num(g.multipliers[j]));
      v.require(component_energy(g.profile, model, j) < 0.0, tag + "component energy not negative");
      const double spread = phase_spread(g.profile[j]);
      worst_phase = std::max(worst_phase, spread);
      v.require(spread <= tol::kPhaseConstancy, tag + "phase spread " + num(spread));
      double peak = 0.0;
      for (cplx z : pos[j].values()) peak = std::max(peak, std::abs(z));
      bool positive = peak > 0.0;
      for (cplx z : pos[j].values())
        if (std::abs(z) > tol::kPositivityFloor * peak && !(z.real() > 0.0)) positive = false;
      v.require(positive, tag + "modulus profile not positive");
    }
  }
  if (v.pass) v.detail = "10 cases, worst residual " + num(worst_residual) + ", worst phase spread " + num(worst_phase);
  return v;
}

Result gradient_check() {
  Result v;
  std::mt19937_64 rng(43);
  const Grid g(256, 24.0);
  double worst = 0.0;
  for (int pair = 0; pair < 20; ++pair) {
    const CouplingModel model = oracle::random_model(rng, pair % 2 ? 2.5 : 2.0);
    const State s = oracle::smooth_random_state(g, rng);
    const State d = oracle::smooth_random_state(g, rng);
    const double eps = tol::kFiniteDifferenceStep;
    const double fd = (energy(s + cplx(eps) * d, model) - energy(s - cplx(eps) * d, model)) / (2.0 * eps);
    const State grad = energy_gradient(s, model);
    double analytic = 0.0;
    for (std::size_t j = 0; j < kComponents; ++j) analytic += 2.0 * l2_inner(grad[j], d[j]).real();
    worst = std::max(worst, std::abs(fd - analytic) / std::abs(analytic));
  }
  v.require(worst <= tol::kGradientFiniteDifference, "relative error " + num(worst));
  if (v.pass) v.detail = "20 pairs, worst relative error " + num(worst);
  return v;
}

Result conservation() {
  Result v;
  EvolveOptions opts;
  opts.record_every = 10;
  const EvolutionTrace tr = evolve(triple().profile, 10.0, 1e-3, one(), opts);
  v.require(tr.max_mass_drift() <= tol::kMassDrift, "mass drift " + num(tr.max_mass_drift()));
  v.require(tr.max_energy_drift() <= tol::kEnergyDrift, "energy drift " + num(tr.max_energy_drift()));

  // The stationary profile is an exact nonlinear eigenstate and its energy
  // error is far below the dt^2 term, so the order is fitted on a breather.
  const State breather = cplx(1.2) * triple().profile;
  std::vector<double> dts{4e-3, 2e-3, 1e-3}, errs;
  for (double dt : dts) {
    EvolveOptions o;
    o.record_every = 5;
    errs.push_back(evolve(breather, 2.0, dt, one(), o).max_energy_drift());
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const double x = std::log(dts[i]), y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(dts.size());
  const double order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  v.require(order >= tol::kSplittingOrderLow && order <= tol::kSplittingOrderHigh, "order " + num(order));
  if (v.pass)
    v.detail = "mass drift " + num(tr.max_mass_drift()) + ", energy drift " + num(tr.max_energy_drift()) + ", order " +
               num(order);
  return v;
}

Result rearrangement_suite() {
  Result v;
  const Grid g(1024, 40.0);
  std::mt19937_64 rng(61);
  double worst_gain = -1e300, worst_modulus_gain = -1e300;
  for (int trial = 0; trial < 10; ++trial) {
    const State s = oracle::smooth_random_state(g, rng);
    const CouplingModel model = oracle::random_model(rng, trial % 2 ? 2.5 : 2.0);
    State r(g);
    for (std::size_t j = 0; j < kComponents; ++j) {
      const RealField mod = modulus(s[j]);
      const RealField rear = rearrange(mod);
      std::vector<double> a(mod.values().begin(), mod.values().end()), b(rear.values().begin(), rear.values().end());
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      v.require(a == b, "trial " + std::to_string(trial) + " not equimeasurable");
      r[j] = to_field(rear);
    }
    const double gain = energy(r, model) - energy(s, model);
    worst_gain = std::max(worst_gain, gain);
    v.require(gain <= tol::kRearrangedEnergySlack, "trial " + std::to_string(trial) + " energy rises by " + num(gain));

    // Same comparison on the moduli, with kinetic terms of the
    // piecewise-linear interpolants; the phase energy no longer helps.
    State mods(g);
    double kin_before = 0.0, kin_after = 0.0;
    for (std::size_t j = 0; j < kComponents; ++j) {
      const RealField mod = modulus(s[j]);
      mods[j] = to_field(mod);
      kin_before += linear_kinetic_energy(mod);
      kin_after += rearranged_kinetic_energy(mod);
    }
    double pot_before = energy(mods, model), pot_after = energy(r, model);
    for (std::size_t j = 0; j < kComponents; ++j) {
      pot_before -= kinetic_energy(mods[j]);
      pot_after -= kinetic_energy(r[j]);
    }
    const double modulus_gain = (kin_after + pot_after) - (kin_before + pot_before);
    worst_modulus_gain = std::max(worst_modulus_gain, modulus_gain);
    v.require(modulus_gain <= tol::kRearrangedEnergySlack,
              "trial " + std::to_string(trial) + " modulus energy rises by " + num(modulus_gain));
  }

  const Grid wide(2048, 80.0);
  struct Case {
    double a1, w1, c1, a2, w2, c2;
  };
  double worst_gap = -1e300;
  for (const Case k : {Case{1.0, 1.0, -15.0, 1.0, 1.0, 15.0}, Case{2.0, 0.8, -12.0, 0.5, 1.5, 14.0},
                       Case{1.0, 2.0, -18.0, 1.5, 0.7, 10.0}, Case{0.3, 1.0, -10.0, 3.0, 1.2, 12.0},
                       Case{1.0, 1.0, -6.0, 1.0, 3.0, 20.0}}) {
    std::vector<double> fv(wide.size()), gv(wide.size()), wv(wide.size());
    for (std::size_t m = 0; m < wide.size(); ++m) {
      const double x = wide.node(m);
      fv[m] = k.a1 * std::pow(oracle::sech((x - k.c1) / k.w1), 2);
      gv[m] = k.a2 * std::pow(oracle::sech((x - k.c2) / k.w2), 2);
      wv[m] = fv[m] + gv[m];
    }
    const double df = linear_kinetic_energy(RealField(wide, fv));
    const double dg = linear_kinetic_energy(RealField(wide, gv));
    const double dw = linear_kinetic_energy(RealField(wide, wv));
    const double dstar = rearranged_kinetic_energy(RealField(wide, wv));
    const double gap = dstar - (dw - 0.75 * std::min(df, dg));
    worst_gap = std::max(worst_gap, gap);
    v.require(gap <= tol::kThreeQuarterSlack, "two-bump gap " + num(gap));
  }
  if (v.pass)
    v.detail = "10 states, worst energy change " + num(worst_gain) + " (moduli " + num(worst_modulus_gain) + "); 5 two-bump cases, worst gap " + num(worst_gap);
  return v;
}

Result subadditivity() {
  Result v;
  const Grid wide(1024, 80.0);
  MassSplit half;
  half.first = {2.0, 0.0, 0.0};
  half.second = {2.0, 0.0, 0.0};
  const SubadditivityResult r = subadditivity_check(one(), half, wide);
  v.require(std::abs(r.margin + 1.0) <= 2e-4, "2+2 margin " + num(r.margin));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> part(0.25, 1.5);
  const Grid fine(4096, 80.0);
  double worst = -1e300;
  int inconclusive = 0;
  for (int k = 0; k < 5; ++k) {
    const CouplingModel model = oracle::random_model(rng, k % 2 ? 2.5 : 2.0);
    MassSplit split;
    for (std::size_t j = 0; j < kComponents; ++j) {
      split.first[j] = part(rng);
      split.second[j] = part(rng);
    }
    try {
      const SubadditivityResult s = subadditivity_check(model, split, fine);
      worst = std::max(worst, s.margin);
      if (s.inconclusive) ++inconclusive;
      v.require(s.inconclusive || s.margin < -s.tolerance, "split " + std::to_string(k) + " margin " + num(s.margin));
    } catch (const Error& e) {
      v.require(false, "split " + std::to_string(k) + ": " + e.what());
    }
  }
  if (v.pass)
    v.detail = "2+2 margin " + num(r.margin) + "; 5 triple splits, largest margin " + num(worst) + ", " +
               std::to_string(inconclusive) + " inconclusive";
  return v;
}

Result orbital_stability() {
  Result v;
  const auto start = std::chrono::steady_clock::now();
  StabilityConfig zero;
  zero.delta = 0.0;
  zero.T = 50.0;
  // At dt = 1e-3 the Strang deformation of the profile alone is 1.5e-6.
  zero.dt = 5e-4;
  zero.sample_every = 200;
  const StabilityReport control = stability_experiment(triple(), one(), zero);
  v.require(control.sup_distance <= tol::kUnperturbedDistance, "delta=0 distance " + num(control.sup_distance));

  double worst_ratio = 0.0;
  for (double delta : {1e-3, 1e-2}) {
    StabilityConfig c;
    c.delta = delta;
    c.T = 50.0;
    c.dt = 1e-3;
    for (const StabilityReport& r : stability_ensemble(triple(), one(), c, {1, 2, 3, 4, 5})) {
      const std::string tag = "delta " + num(delta) + " seed " + std::to_string(r.seed) + ": ";
      v.require(r.verdict == cnls::Verdict::bounded, tag + to_string(r.verdict));
      v.require(r.sup_distance <= tol::kStabilityBoundOverDelta * delta, tag + "sup " + num(r.sup_distance));
      worst_ratio = std::max(worst_ratio, r.sup_distance / delta);
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  v.require(seconds <= 600.0, "runtime " + num(seconds) + " s");
  if (v.pass)
    v.detail = "control " + num(control.sup_distance) + ", worst sup/delta " + num(worst_ratio) + ", " + num(seconds) +
               " s";
  return v;
}

Result concentration_diagnostic() {
  Result v;
  double worst = 1.0;
  auto check = [&](const State& s, const std::string& tag) {
    const double gamma = concentration(s, {10.0}).gamma_proxy;
    worst = std::min(worst, gamma);
    v.require(gamma >= tol::kGammaCompact, tag + " gamma " + num(gamma));
  };
  check(triple().profile, "triple");
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> um(0.5, 3.0);
  for (int k = 0; k < 3; ++k) {
    const CouplingModel model = oracle::random_model(rng, k % 2 ? 2.5 : 2.0);
    const MassTriple m(um(rng), um(rng), um(rng));
    check(adapted_solve(model, m).profile, "random " + std::to_string(k));
  }

  // Two half-mass copies of the triple ground state, 40 apart.
  const Grid wide(2048, 80.0);
  const GroundState g = solve_ground_state(one(), MassTriple(4.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0), wide);
  const auto q = static_cast<std::ptrdiff_t>(std::lround(20.0 / wide.spacing()));
  State split(wide);
  for (std::size_t j = 0; j < kComponents; ++j)
    split[j] = cplx(std::sqrt(0.5)) * (shift_by_steps(g.profile[j], q) + shift_by_steps(g.profile[j], -q));
  const ConcentrationProfile c = concentration(split, {2.0, 3.0, 4.0, 5.0});
  double worst_plateau = 0.0;
  for (double val : c.values) worst_plateau = std::max(worst_plateau, std::abs(val / c.total_mass - 0.5));
  v.require(worst_plateau <= 0.02, "two-bump plateau off half mass by " + num(worst_plateau));
  if (v.pass) v.detail = "smallest gamma " + num(worst) + ", plateau within " + num(worst_plateau) + " of half mass";
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria{
      {"single-component oracle", single_component_oracle},
      {"equal-coupling triple", equal_coupling_triple},
      {"structural signs on a random sweep", structural_signs},
      {"energy gradient vs finite differences", gradient_check},
      {"conservation and splitting order", conservation},
      {"rearrangement suite", rearrangement_suite},
      {"strict subadditivity", subadditivity},
      {"orbital stability", orbital_stability},
      {"concentration diagnostic", concentration_diagnostic},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Result v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    if (!v.pass) ++failures;
    std::cout << "criterion " << i + 1 << " " << (v.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << ": "
              << v.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
