#pragma once

// Normalized ground states: minimizers of the energy under three independent
// mass constraints ||u_1||^2 = r, ||u_2||^2 = s, ||u_3||^2 = t.

#include <cstdint>
#include <optional>
#include <vector>

#include "cnls/error.hpp"
#include "cnls/model.hpp"

namespace cnls {

enum class InitKind { gaussian_bumps, sech_guess, supplied };

enum class FlowScheme {
  /// u <- u - tau (1 + tau(-d^2 + c_j))^{-1} G_j, c_j = max(w_j, 0).
  preconditioned,
  /// u <- u - tau G_j. Stable only for tau < 2 / max k^2.
  explicit_euler,
};

struct SolverConfig {
  double tau = 0.5;
  std::size_t max_iters = 20000;
  double residual_tol = 1e-10;
  double energy_tol = 1e-13;
  /// Replace each component by the rearrangement of its modulus every this
  /// many iterations; 0 disables.
  std::size_t rearrange_every = 25;
  std::uint64_t seed = 0;
  InitKind init = InitKind::gaussian_bumps;
  /// Required when init == supplied.
  std::optional<State> initial;
  /// Relative amplitude of seeded noise added to the initial guess.
  double init_noise = 0.0;
  FlowScheme scheme = FlowScheme::preconditioned;
  std::size_t check_every = 10;
  bool record_history = false;

  void validate() const;
  /// Stable explicit step for a grid: 0.2 h^2.
  static double explicit_tau(const Grid& grid);
};

struct GroundState {
  State profile;
  Multipliers multipliers;
  double lambda = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
  MassTriple masses_achieved;
  /// Energy after every accepted iteration when record_history is set.
  std::vector<double> energy_history;
};

/// The flow hit max_iters; `last()` holds the final iterate.
class NonConvergence : public Error {
public:
  NonConvergence(const std::string& what, GroundState last) : Error(what), last_(std::move(last)) {}
  const GroundState& last() const noexcept { return last_; }

private:
  GroundState last_;
};

/// Step-size control shrank tau below its floor.
class StepCollapse : public Error {
public:
  using Error::Error;
};

/// Fixed-point refinement moved away from a solution.
class Divergence : public Error {
public:
  using Error::Error;
};

/// Rescale every positive-mass component so its mass equals the target;
/// zero-target components are set to zero.
void project_masses(State& s, const MassTriple& target);

/// Initial guess for the flow.
State initial_guess(const Grid& grid, const MassTriple& masses, const SolverConfig& cfg);

GroundState minimize(const CouplingModel& model, const MassTriple& masses, const Grid& grid,
                     const SolverConfig& cfg = {});

struct RefineOptions {
  std::size_t max_sweeps = 400;
  double target_residual = 1e-13;
  /// Consecutive residual increases tolerated before giving up.
  std::size_t patience = 5;
};

/// Fixed-point polish Phi_j <- (-d^2 + w_j)^{-1} N_j(Phi) with w re-extracted
/// and masses restored every sweep.
GroundState refine_fixed_point(const State& s, const CouplingModel& model, const MassTriple& masses,
                               const RefineOptions& opts = {});

/// m(a1, a2) for the two-component functional with couplings
/// (a11, a22, a12) = (alpha1, alpha2, beta); the third component is empty.
GroundState two_component_min(double alpha1, double alpha2, double beta, double a1, double a2, double p,
                              const Grid& grid, const SolverConfig& cfg = {});

struct ConcentrationProfile {
  std::vector<double> etas;
  std::vector<double> values;
  double total_mass = 0.0;
  /// P at the largest eta divided by the total mass.
  double gamma_proxy = 0.0;
};

/// P(eta) = max over grid centres y of the mass of sum_j |u_j|^2 in
/// [y - eta, y + eta] (periodic windows).
ConcentrationProfile concentration(const State& s, const std::vector<double>& etas);

struct SubadditivityResult {
  double lambda_total = 0.0;
  double lambda_first = 0.0;
  double lambda_second = 0.0;
  /// lambda(total) - lambda(first) - lambda(second).
  double margin = 0.0;
  /// Margins within +-tolerance are inconclusive.
  double tolerance = 0.0;
  bool inconclusive = false;
  bool strictly_subadditive() const noexcept { return !inconclusive && margin < 0.0; }
};

/// Raw (possibly zero) masses of one half of a split.
struct MassSplit {
  std::array<double, kComponents> first{};
  std::array<double, kComponents> second{};
};

/// Solves the three problems concurrently and compares.
SubadditivityResult subadditivity_check(const CouplingModel& model, const MassSplit& split, const Grid& grid,
                                        const SolverConfig& cfg = {});

/// Solves `minimize` and then `refine_fixed_point`; keeps the better of the two.
GroundState solve_ground_state(const CouplingModel& model, const MassTriple& masses, const Grid& grid,
                               const SolverConfig& cfg = {});

/// Grid on which a ground state with multipliers `w` is resolved: the box
/// holds exp(-sqrt(w_min) L / 2) below 1e-15 and the spacing resolves the
/// sech^{1/(p-1)}((p-1) sqrt(w_max) x) profile to round-off. Never smaller
/// than (min_n, min_length).
Grid adapted_grid(const Multipliers& w, double p, std::size_t min_n = 1024, double min_length = 40.0,
                  std::size_t max_n = std::size_t{1} << 15);

/// Rotate each component by its mass-weighted mean phase so that the result
/// is (numerically) real and positive.
State positive_representative(const State& s);

/// Largest |arg(u_j e^{-i theta_j})| over samples with |u_j| above
/// kPositivityFloor * max |u_j|, theta_j the mass-weighted mean phase.
double phase_spread(const Field& f);

}  // namespace cnls
