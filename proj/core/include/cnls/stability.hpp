#pragma once

// Orbital-stability experiments: distance to the symmetry orbit of a ground
// state, seeded perturbations and perturb-evolve-measure runs.

#include <cstdint>
#include <vector>

#include "cnls/evolution.hpp"
#include "cnls/ground_state.hpp"

namespace cnls {

struct OrbitalFit {
  double distance = 0.0;
  /// Translation y of the representative, in length units.
  double shift = 0.0;
  std::array<double, kComponents> phases{};
};

/// inf over translations y and phases theta_j of
/// sqrt(sum_j ||S_j - e^{i theta_j} Phi_j(. - y)||_{H^1}^2).
///
/// All whole-grid translations are scanned at once through an FFT
/// correlation; the best one is then refined to sub-grid y by Newton's
/// method on the band-limited correlation when `subgrid` is set.
OrbitalFit orbital_fit(const State& s, const State& profile, bool subgrid = true);

double orbital_distance(const State& s, const GroundState& g);

/// Direct evaluation of the distance for given translation and phases.
double orbit_point_distance(const State& s, const State& profile, double shift,
                            const std::array<double, kComponents>& phases);

enum class PerturbationKind { random_h1, mass_preserving_random, component_tilt };

/// Unit Y-norm direction of the requested kind, deterministic in `seed`.
State perturbation_direction(const State& s, PerturbationKind kind, std::uint64_t seed);

/// S + amplitude * eta; mass_preserving_random then restores every
/// component's mass.
State perturb(const State& s, PerturbationKind kind, double amplitude, std::uint64_t seed);

enum class Verdict { bounded, escaped, blow_up };

struct StabilityReport {
  double delta = 0.0;
  double eps = 0.0;
  double sup_distance = 0.0;
  double initial_distance = 0.0;
  std::vector<double> times_sampled;
  Verdict verdict = Verdict::bounded;
  /// The distance fell by more than half after a sustained rise: the run may
  /// be approaching a different minimizer than the representative.
  bool representative_switch_suspected = false;
  std::uint64_t seed = 0;
  EvolutionTrace trace;
};

struct StabilityConfig {
  PerturbationKind kind = PerturbationKind::random_h1;
  double delta = 1e-3;
  double T = 50.0;
  double dt = 1e-3;
  /// Orbital distance sampled every this many steps (100 -> every 0.1 at dt = 1e-3).
  std::size_t sample_every = 100;
  /// Verdict threshold; <= 0 selects kDefaultEpsOverDelta * delta, or
  /// kUnperturbedDistance when delta = 0.
  double eps = 0.0;
  std::uint64_t seed = 0;
};

StabilityReport stability_experiment(const GroundState& g, const CouplingModel& model, const StabilityConfig& cfg);

/// Runs one experiment per seed concurrently.
std::vector<StabilityReport> stability_ensemble(const GroundState& g, const CouplingModel& model,
                                                const StabilityConfig& cfg, const std::vector<std::uint64_t>& seeds);

const char* to_string(Verdict v) noexcept;
const char* to_string(PerturbationKind k) noexcept;

}  // namespace cnls
