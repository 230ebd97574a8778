#include "cnls/ground_state.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "cnls/tolerances.hpp"

namespace cnls {

namespace {

bool component_active(const MassTriple& m, std::size_t j) { return m[j] > 0.0; }

MassTriple achieved(const State& s) {
  const auto m = masses(s);
  return MassTriple(m[0], m[1], m[2]);
}

GroundState package(State s, const CouplingModel& model, std::size_t iterations) {
  GroundState gs{std::move(s), {}, 0.0, 0.0, iterations, {}, {}};
  gs.multipliers = lagrange_multipliers(gs.profile, model);
  gs.lambda = energy(gs.profile, model);
  gs.residual = el_residual(gs.profile, gs.multipliers, model);
  gs.masses_achieved = achieved(gs.profile);
  return gs;
}

// One preconditioned (or explicit) gradient step on every active component.
// The step direction is the constrained gradient G_j + w_j u_j, which is
// L^2-orthogonal to u_j, so fixed points of step + renormalisation solve the
// Euler-Lagrange system whatever the preconditioner.
State flow_step(const State& u, const CouplingModel& model, const MassTriple& target, double tau,
                FlowScheme scheme) {
  State grad = energy_gradient(u, model);
  const Multipliers w = lagrange_multipliers(u, model);
  for (std::size_t j = 0; j < kComponents; ++j)
    for (std::size_t m = 0; m < u.grid().size(); ++m) grad[j][m] += w[j] * u[j][m];
  const Grid& grid = u.grid();
  const std::size_t n = grid.size();
  const auto k = grid.wavenumbers();
  State next(grid);
  std::vector<cplx> spec(n);
  for (std::size_t j = 0; j < kComponents; ++j) {
    if (!component_active(target, j)) continue;
    if (scheme == FlowScheme::explicit_euler) {
      Field f = u[j];
      for (std::size_t m = 0; m < n; ++m) f[m] -= tau * grad[j][m];
      next[j] = std::move(f);
      continue;
    }
    const double shift = std::max(w[j], 0.0);
    grid.fft().forward(grad[j].values(), spec);
    for (std::size_t m = 0; m < n; ++m) spec[m] /= (1.0 + tau * (k[m] * k[m] + shift)) * static_cast<double>(n);
    Field step(grid);
    grid.fft().backward(spec, step.values());
    Field f = u[j];
    for (std::size_t m = 0; m < n; ++m) f[m] -= tau * step[m];
    next[j] = std::move(f);
  }
  project_masses(next, target);
  return next;
}

State rearranged(const State& u) {
  State out(u.grid());
  for (std::size_t j = 0; j < kComponents; ++j) out[j] = to_field(rearrange(modulus(u[j])));
  return out;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(tau > 0.0)) throw InvalidArgument("solver tau must be positive");
  if (!(residual_tol > 0.0) || !(energy_tol > 0.0)) throw InvalidArgument("solver tolerances must be positive");
  if (max_iters == 0) throw InvalidArgument("solver max_iters must be positive");
  if (check_every == 0) throw InvalidArgument("solver check_every must be positive");
  if (init_noise < 0.0) throw InvalidArgument("solver init_noise must be non-negative");
  if (init == InitKind::supplied && !initial) throw InvalidArgument("supplied initialisation without a state");
}

double SolverConfig::explicit_tau(const Grid& grid) {
  const double h = grid.spacing();
  return 0.2 * h * h;
}

void project_masses(State& s, const MassTriple& target) {
  for (std::size_t j = 0; j < kComponents; ++j) {
    if (!component_active(target, j)) {
      s[j] = Field(s.grid());
      continue;
    }
    const double current = mass(s[j]);
    if (!(current > 0.0)) throw InvalidArgument("cannot project a zero component onto positive mass");
    s[j] *= std::sqrt(target[j] / current);
  }
}

State initial_guess(const Grid& grid, const MassTriple& masses, const SolverConfig& cfg) {
  State s(grid);
  if (cfg.init == InitKind::supplied) {
    if (!cfg.initial) throw InvalidArgument("supplied initialisation without a state");
    if (!(cfg.initial->grid() == grid)) throw GridMismatch("supplied initial state is on a different grid");
    s = *cfg.initial;
  } else {
    const auto x = grid.nodes();
    for (std::size_t j = 0; j < kComponents; ++j) {
      Field f(grid);
      for (std::size_t m = 0; m < grid.size(); ++m) {
        f[m] = cfg.init == InitKind::gaussian_bumps ? std::exp(-0.125 * x[m] * x[m]) : 1.0 / std::cosh(0.5 * x[m]);
      }
      s[j] = std::move(f);
    }
  }
  if (cfg.init_noise > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal;
    for (std::size_t j = 0; j < kComponents; ++j) {
      double peak = 0.0;
      for (cplx z : s[j].values()) peak = std::max(peak, std::abs(z));
      for (std::size_t m = 0; m < grid.size(); ++m) {
        const double envelope = std::abs(s[j][m]) / (peak > 0.0 ? peak : 1.0);
        s[j][m] += cfg.init_noise * peak * envelope * cplx(normal(rng), normal(rng));
      }
    }
  }
  project_masses(s, masses);
  return s;
}

GroundState minimize(const CouplingModel& model, const MassTriple& masses, const Grid& grid,
                     const SolverConfig& cfg) {
  cfg.validate();
  State u = initial_guess(grid, masses, cfg);
  double e = energy(u, model);
  const double slack = 10.0 * cfg.energy_tol;
  double tau = cfg.tau;
  const double tau_floor = cfg.tau * 1e-8;
  double e_at_check = e;

  std::vector<double> history;
  if (cfg.record_history) history.push_back(e);

  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    State next = flow_step(u, model, masses, tau, cfg.scheme);
    double e_next = energy(next, model);
    while (!(e_next <= e + slack + 1e-15 * std::abs(e)) || !next.finite()) {
      tau *= 0.5;
      if (tau < tau_floor) throw StepCollapse("gradient flow step collapsed below " + std::to_string(tau_floor));
      next = flow_step(u, model, masses, tau, cfg.scheme);
      e_next = energy(next, model);
    }
    u = std::move(next);
    e = e_next;

    if (cfg.rearrange_every != 0 && it % cfg.rearrange_every == 0) {
      State r = rearranged(u);
      project_masses(r, masses);
      const double e_r = energy(r, model);
      if (e_r <= e) {
        u = std::move(r);
        e = e_r;
      }
    }
    if (cfg.record_history) history.push_back(e);

    if (it % cfg.check_every == 0) {
      const double decrease = e_at_check - e;
      e_at_check = e;
      if (decrease < cfg.energy_tol) {
        const double res = el_residual(u, lagrange_multipliers(u, model), model);
        if (res < cfg.residual_tol) {
          GroundState gs = package(std::move(u), model, it);
          gs.energy_history = std::move(history);
          return gs;
        }
      }
    }
  }
  GroundState last = package(std::move(u), model, cfg.max_iters);
  last.energy_history = std::move(history);
  throw NonConvergence("gradient flow did not converge in " + std::to_string(cfg.max_iters) +
                           " iterations (residual " + std::to_string(last.residual) + ")",
                       std::move(last));
}

GroundState refine_fixed_point(const State& s, const CouplingModel& model, const MassTriple& target,
                               const RefineOptions& opts) {
  const Grid& grid = s.grid();
  const std::size_t n = grid.size();
  const auto k = grid.wavenumbers();

  State u = s;
  project_masses(u, target);
  const double initial = el_residual(u, lagrange_multipliers(u, model), model);
  double best_residual = initial;
  State best = u;
  double previous = initial;
  std::size_t rising = 0;
  std::vector<cplx> spec(n);

  for (std::size_t sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    if (best_residual <= opts.target_residual) break;
    const Multipliers w = lagrange_multipliers(u, model);
    State next(grid);
    for (std::size_t j = 0; j < kComponents; ++j) {
      if (!component_active(target, j)) continue;
      if (!(w[j] > 0.0))
        throw Divergence("fixed-point refinement: multiplier w" + std::to_string(j + 1) + " = " +
                         std::to_string(w[j]) + " is not positive");
      const Field nl = nonlinearity(u, model, j);
      grid.fft().forward(nl.values(), spec);
      for (std::size_t m = 0; m < n; ++m) spec[m] /= (k[m] * k[m] + w[j]) * static_cast<double>(n);
      Field f(grid);
      grid.fft().backward(spec, f.values());
      next[j] = std::move(f);
    }
    project_masses(next, target);
    if (!next.finite()) throw Divergence("fixed-point refinement produced non-finite values");
    u = std::move(next);
    const double res = el_residual(u, lagrange_multipliers(u, model), model);
    if (res < best_residual) {
      best_residual = res;
      best = u;
    }
    rising = res > previous ? rising + 1 : 0;
    previous = res;
    if (rising >= opts.patience) {
      if (best_residual < initial) break;
      throw Divergence("fixed-point refinement residual increased for " + std::to_string(opts.patience) +
                       " consecutive sweeps");
    }
  }
  return package(std::move(best), model, 0);
}

GroundState solve_ground_state(const CouplingModel& model, const MassTriple& masses, const Grid& grid,
                               const SolverConfig& cfg) {
  GroundState flow = minimize(model, masses, grid, cfg);
  try {
    GroundState polished = refine_fixed_point(flow.profile, model, masses);
    if (polished.residual < flow.residual && polished.lambda <= flow.lambda + 10.0 * cfg.energy_tol) {
      polished.iterations = flow.iterations;
      polished.energy_history = std::move(flow.energy_history);
      return polished;
    }
  } catch (const Divergence&) {
  }
  return flow;
}

GroundState two_component_min(double alpha1, double alpha2, double beta, double a1, double a2, double p,
                              const Grid& grid, const SolverConfig& cfg) {
  if (!(alpha1 > 0.0 && alpha2 > 0.0 && beta > 0.0 && a1 > 0.0 && a2 > 0.0))
    throw InvalidArgument("two_component_min: all parameters must be positive");
  CouplingModel::Matrix a;
  for (auto& row : a) row.fill(1.0);
  a[0][0] = alpha1;
  a[1][1] = alpha2;
  a[0][1] = a[1][0] = beta;
  return solve_ground_state(CouplingModel(a, p), MassTriple(a1, a2, 0.0), grid, cfg);
}

ConcentrationProfile concentration(const State& s, const std::vector<double>& etas) {
  const Grid& grid = s.grid();
  const std::size_t n = grid.size();
  const double h = grid.spacing();
  std::vector<double> density(n, 0.0);
  for (std::size_t j = 0; j < kComponents; ++j)
    for (std::size_t m = 0; m < n; ++m) density[m] += std::norm(s[j][m]);

  // Prefix sums over two periods for wrap-around windows.
  std::vector<double> prefix(2 * n + 1, 0.0);
  for (std::size_t i = 0; i < 2 * n; ++i) prefix[i + 1] = prefix[i] + density[i % n];

  ConcentrationProfile out;
  out.etas = etas;
  out.total_mass = h * prefix[n];
  for (double eta : etas) {
    if (!(eta >= 0.0)) throw InvalidArgument("concentration window half-width must be non-negative");
    const auto half = static_cast<std::size_t>(std::floor(eta / h + 1e-9));
    double best = 0.0;
    if (2 * half + 1 >= n) {
      best = prefix[n];
    } else {
      const std::size_t width = 2 * half + 1;
      for (std::size_t c = 0; c < n; ++c) {
        const std::size_t start = (c + n - half) % n;
        best = std::max(best, prefix[start + width] - prefix[start]);
      }
    }
    out.values.push_back(h * best);
  }
  if (!etas.empty() && out.total_mass > 0.0) {
    const auto largest = std::max_element(etas.begin(), etas.end()) - etas.begin();
    out.gamma_proxy = out.values[static_cast<std::size_t>(largest)] / out.total_mass;
  }
  return out;
}

SubadditivityResult subadditivity_check(const CouplingModel& model, const MassSplit& split, const Grid& grid,
                                        const SolverConfig& cfg) {
  double first_total = 0.0;
  double second_total = 0.0;
  for (std::size_t j = 0; j < kComponents; ++j) {
    if (!(split.first[j] >= 0.0) || !(split.second[j] >= 0.0))
      throw InvalidArgument("subadditivity split masses must be non-negative");
    first_total += split.first[j];
    second_total += split.second[j];
  }
  if (!(first_total > 0.0) || !(second_total > 0.0))
    throw InvalidArgument("subadditivity split needs positive total mass in both parts");

  const MassTriple first(split.first[0], split.first[1], split.first[2]);
  const MassTriple second(split.second[0], split.second[1], split.second[2]);
  const MassTriple total(first.r + second.r, first.s + second.s, first.t + second.t);

  auto solve = [&](const MassTriple& m) { return solve_ground_state(model, m, grid, cfg).lambda; };
  auto f_total = std::async(std::launch::async, solve, total);
  auto f_first = std::async(std::launch::async, solve, first);
  auto f_second = std::async(std::launch::async, solve, second);

  SubadditivityResult res;
  res.lambda_total = f_total.get();
  res.lambda_first = f_first.get();
  res.lambda_second = f_second.get();
  res.margin = res.lambda_total - res.lambda_first - res.lambda_second;
  res.tolerance = 2.0 * std::max(cfg.energy_tol, cfg.residual_tol);
  res.inconclusive = std::abs(res.margin) <= res.tolerance;
  return res;
}

Grid adapted_grid(const Multipliers& w, double p, std::size_t min_n, double min_length, std::size_t max_n) {
  double w_min = std::numeric_limits<double>::infinity();
  double w_max = 0.0;
  for (double v : w.w) {
    if (!(v > 0.0)) continue;
    w_min = std::min(w_min, v);
    w_max = std::max(w_max, v);
  }
  if (!(w_max > 0.0)) throw InvalidArgument("adapted_grid: no positive multiplier");
  const double length = std::max(min_length, 70.0 / std::sqrt(w_min));
  const double h_max = std::numbers::pi / (22.0 * std::max(1.0, p - 1.0) * std::sqrt(w_max));
  std::size_t n = min_n;
  while (length / static_cast<double>(n) > h_max && n < max_n) n *= 2;
  return Grid(n, length);
}

double phase_spread(const Field& f) {
  double peak = 0.0;
  cplx weighted = 0.0;
  for (cplx z : f.values()) {
    peak = std::max(peak, std::abs(z));
    weighted += std::abs(z) * z;
  }
  if (peak == 0.0) return 0.0;
  const cplx rot = std::polar(1.0, -std::arg(weighted));
  double spread = 0.0;
  for (cplx z : f.values()) {
    if (std::abs(z) <= tol::kPositivityFloor * peak) continue;
    spread = std::max(spread, std::abs(std::arg(z * rot)));
  }
  return spread;
}

State positive_representative(const State& s) {
  State out = s;
  for (std::size_t j = 0; j < kComponents; ++j) {
    cplx weighted = 0.0;
    for (cplx z : s[j].values()) weighted += std::abs(z) * z;
    if (weighted != 0.0) out[j] *= std::polar(1.0, -std::arg(weighted));
  }
  return out;
}

}  // namespace cnls
