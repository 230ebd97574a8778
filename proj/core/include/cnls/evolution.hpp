#pragma once

// Strang split-step Fourier integration of the coupled system.

#include <functional>
#include <vector>

#include "cnls/error.hpp"
#include "cnls/model.hpp"

namespace cnls {

struct EvolutionTrace {
  std::vector<double> times;
  /// |H(t) - H(0)| / |H(0)| (absolute when H(0) = 0).
  std::vector<double> energy_drift;
  /// Per-component |Q_j(t) - Q_j(0)| / Q_j(0) (absolute for empty components).
  std::array<std::vector<double>, kComponents> mass_drifts;
  std::vector<double> snapshot_times;
  std::vector<State> snapshots;
  /// Filled by the stability experiments, aligned with `times`.
  std::vector<double> orbital_distance;

  double max_energy_drift() const noexcept;
  double max_mass_drift() const noexcept;
};

/// Non-finite values appeared; carries the trace recorded so far.
class BlowUp : public Error {
public:
  BlowUp(const std::string& what, EvolutionTrace partial) : Error(what), partial_(std::move(partial)) {}
  const EvolutionTrace& partial() const noexcept { return partial_; }

private:
  EvolutionTrace partial_;
};

/// exp(-i k^2 tau) in Fourier space on every component.
void linear_flow(State& s, double tau);
/// u_j <- exp(i tau sum_k a_kj |u_k|^p |u_j|^{p-2}) u_j, exact for this substep.
void nonlinear_flow(State& s, double tau, const CouplingModel& model);

/// One Strang step: half linear, exact nonlinear phase rotation, half linear.
State step(const State& s, double dt, const CouplingModel& model);

struct EvolveOptions {
  /// Keep a snapshot every this many steps; 0 disables.
  std::size_t snapshot_every = 0;
  /// Record drifts (and call the observer) every this many steps.
  std::size_t record_every = 1;
  /// Called with (t, state) at t = 0 and at every recorded time.
  std::function<void(double, const State&)> observer;
};

struct Evolution {
  EvolutionTrace trace;
  State final_state;
};

/// Integrate to time T in steps of dt; consecutive half linear substeps
/// between records are fused. A negative dt integrates backwards to -T.
/// Throws BlowUp when non-finite values appear.
Evolution evolve_state(const State& s0, double T, double dt, const CouplingModel& model,
                       const EvolveOptions& opts = {});

EvolutionTrace evolve(const State& s0, double T, double dt, const CouplingModel& model,
                      const EvolveOptions& opts = {});

/// Circular centre of mass of sum_j |u_j|^2 on the periodic box.
double centre_of_mass(const State& s);

}  // namespace cnls
