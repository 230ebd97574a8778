#include "cnls/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cnls/tolerances.hpp"

namespace cnls {

double EvolutionTrace::max_energy_drift() const noexcept {
  return energy_drift.empty() ? 0.0 : *std::max_element(energy_drift.begin(), energy_drift.end());
}

double EvolutionTrace::max_mass_drift() const noexcept {
  double worst = 0.0;
  for (const auto& d : mass_drifts)
    if (!d.empty()) worst = std::max(worst, *std::max_element(d.begin(), d.end()));
  return worst;
}

namespace {

// Fourier multipliers exp(-i k^2 tau) / n for one tau, reused across steps.
class LinearPropagator {
public:
  LinearPropagator(const Grid& grid, double tau) : phase_(grid.size()), spec_(grid.size()) {
    const auto k = grid.wavenumbers();
    const double inv_n = 1.0 / static_cast<double>(grid.size());
    for (std::size_t m = 0; m < phase_.size(); ++m) phase_[m] = std::polar(inv_n, -k[m] * k[m] * tau);
  }

  void apply(State& s) {
    const FftPlan& fft = s.grid().fft();
    for (std::size_t j = 0; j < kComponents; ++j) {
      fft.forward(s[j].values(), spec_);
      for (std::size_t m = 0; m < spec_.size(); ++m) spec_[m] *= phase_[m];
      fft.backward(spec_, s[j].values());
    }
  }

private:
  std::vector<cplx> phase_;
  std::vector<cplx> spec_;
};

}  // namespace

void linear_flow(State& s, double tau) { LinearPropagator(s.grid(), tau).apply(s); }

void nonlinear_flow(State& s, double tau, const CouplingModel& model) {
  const std::size_t n = s.grid().size();
  const double p = model.p();
  std::array<std::vector<double>, kComponents> pm;
  std::array<std::vector<double>, kComponents> amp;
  for (std::size_t k = 0; k < kComponents; ++k) {
    pm[k].resize(n);
    amp[k].resize(n);
    for (std::size_t m = 0; m < n; ++m) {
      amp[k][m] = std::abs(s[k][m]);
      pm[k][m] = p == 2.0 ? std::norm(s[k][m]) : std::pow(amp[k][m], p);
    }
  }
  for (std::size_t j = 0; j < kComponents; ++j) {
    for (std::size_t m = 0; m < n; ++m) {
      double coeff = 0.0;
      for (std::size_t k = 0; k < kComponents; ++k) coeff += model.a(k, j) * pm[k][m];
      if (p != 2.0) coeff = amp[j][m] > 0.0 ? coeff * std::pow(amp[j][m], p - 2.0) : 0.0;
      s[j][m] *= std::polar(1.0, tau * coeff);
    }
  }
}

State step(const State& s, double dt, const CouplingModel& model) {
  State out = s;
  linear_flow(out, 0.5 * dt);
  nonlinear_flow(out, dt, model);
  linear_flow(out, 0.5 * dt);
  return out;
}

namespace {

struct Recorder {
  const CouplingModel& model;
  const EvolveOptions& opts;
  double e0;
  std::array<double, kComponents> q0;
  EvolutionTrace trace;

  void record(double t, const State& s) {
    trace.times.push_back(t);
    const double e = energy(s, model);
    trace.energy_drift.push_back(e0 != 0.0 ? std::abs(e - e0) / std::abs(e0) : std::abs(e - e0));
    const auto q = masses(s);
    for (std::size_t j = 0; j < kComponents; ++j)
      trace.mass_drifts[j].push_back(q0[j] != 0.0 ? std::abs(q[j] - q0[j]) / q0[j] : std::abs(q[j]));
    if (opts.observer) opts.observer(t, s);
  }
};

}  // namespace

Evolution evolve_state(const State& s0, double T, double dt, const CouplingModel& model,
                       const EvolveOptions& opts) {
  if (!(T >= 0.0) || !std::isfinite(T)) throw InvalidArgument("evolve: T must be finite and non-negative");
  if (!(dt != 0.0) || !std::isfinite(dt)) throw InvalidArgument("evolve: dt must be non-zero and finite");
  if (opts.record_every == 0) throw InvalidArgument("evolve: record_every must be positive");
  if (!s0.finite()) throw InvalidArgument("evolve: initial state is not finite");

  const double h = std::abs(dt);
  const double dir = dt > 0.0 ? 1.0 : -1.0;
  const auto nsteps = static_cast<std::size_t>(std::ceil(T / h - 1e-9));

  Recorder rec{model, opts, energy(s0, model), masses(s0), {}};
  State u = s0;
  rec.record(0.0, u);
  if (opts.snapshot_every != 0) {
    rec.trace.snapshot_times.push_back(0.0);
    rec.trace.snapshots.push_back(u);
  }

  auto blow_up = [&](double t) {
    throw BlowUp("non-finite values at t = " + std::to_string(t), std::move(rec.trace));
  };

  LinearPropagator half(s0.grid(), 0.5 * dt);
  LinearPropagator full(s0.grid(), dt);
  std::size_t done = 0;
  double t = 0.0;
  while (done < nsteps) {
    // Block ends at the next record, snapshot or final step.
    std::size_t end = std::min(nsteps, (done / opts.record_every + 1) * opts.record_every);
    if (opts.snapshot_every != 0)
      end = std::min(end, (done / opts.snapshot_every + 1) * opts.snapshot_every);

    double pending_half = 0.0;
    for (std::size_t i = done; i < end; ++i) {
      const double remaining = T - static_cast<double>(i) * h;
      const double dti = dir * std::min(h, remaining);
      if (dti == dir * h && i != done)
        full.apply(u);
      else if (dti == dir * h)
        half.apply(u);
      else
        linear_flow(u, pending_half + 0.5 * dti);
      nonlinear_flow(u, dti, model);
      pending_half = 0.5 * dti;
      t = dir * std::min(T, static_cast<double>(i + 1) * h);
      if ((i + 1) % tol::kNanGuardEvery == 0 && !u.finite()) blow_up(t);
    }
    if (pending_half == 0.5 * dir * h)
      half.apply(u);
    else
      linear_flow(u, pending_half);
    done = end;
    if (!u.finite()) blow_up(t);

    if (done % opts.record_every == 0 || done == nsteps) rec.record(t, u);
    if (opts.snapshot_every != 0 && done % opts.snapshot_every == 0) {
      rec.trace.snapshot_times.push_back(t);
      rec.trace.snapshots.push_back(u);
    }
  }
  return {std::move(rec.trace), std::move(u)};
}

EvolutionTrace evolve(const State& s0, double T, double dt, const CouplingModel& model, const EvolveOptions& opts) {
  return evolve_state(s0, T, dt, model, opts).trace;
}

double centre_of_mass(const State& s) {
  const Grid& grid = s.grid();
  const double L = grid.length();
  const auto x = grid.nodes();
  cplx acc = 0.0;
  for (std::size_t m = 0; m < grid.size(); ++m) {
    double density = 0.0;
    for (std::size_t j = 0; j < kComponents; ++j) density += std::norm(s[j][m]);
    acc += density * std::polar(1.0, 2.0 * std::numbers::pi * x[m] / L);
  }
  return std::arg(acc) * L / (2.0 * std::numbers::pi);
}

}  // namespace cnls
