#include "doctest.h"

#include <cmath>
#include <numbers>

#include "cnls/evolution.hpp"
#include "cnls/ground_state.hpp"
#include "cnls/tolerances.hpp"
#include "oracles.hpp"

using namespace cnls;

namespace {

const Grid& box() {
  static const Grid g(1024, 40.0);
  return g;
}

const CouplingModel& one() {
  static const CouplingModel m = CouplingModel::uniform(1.0, 2.0);
  return m;
}

const GroundState& triple() {
  static const GroundState g = solve_ground_state(one(), MassTriple(4.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0), box());
  return g;
}

double standing_wave_error(double dt) {
  const GroundState& g = triple();
  const Evolution ev = evolve_state(g.profile, 1.0, dt, one(), {});
  State exact = g.profile;
  for (std::size_t j = 0; j < kComponents; ++j) exact[j] *= std::polar(1.0, g.multipliers[j] * 1.0);
  return y_norm(ev.final_state - exact);
}

}  // namespace

TEST_SUITE("split-step") {
  TEST_CASE("zero state stays zero") {
    const State z = step(State(box()), 1e-3, one());
    for (std::size_t j = 0; j < kComponents; ++j)
      for (std::size_t m = 0; m < box().size(); ++m) CHECK(z[j][m] == cplx(0.0));
  }

  TEST_CASE("small plane wave advances with the free phase") {
    const double k = 2.0 * std::numbers::pi * 5.0 / box().length();
    const double amp = 1e-8;
    const Field wave = oracle::sample(box(), [&](double x) { return amp * std::polar(1.0, k * x); });
    State s(wave, wave, Field(box()));
    const double dt = 1e-3;
    for (int i = 0; i < 100; ++i) s = step(s, dt, one());
    const cplx phase = std::polar(1.0, -k * k * 100 * dt);
    for (std::size_t m = 0; m < box().size(); m += 31) CHECK(std::abs(s[0][m] - phase * wave[m]) < 1e-12 * amp);
  }

  TEST_CASE("standing wave follows the phase law") {
    // At dt = 1e-3 the Strang profile deformation is ~1.7e-6 in H1; the bound
    // is met at dt = 5e-4 and the error scales with dt^2.
    const double fine = standing_wave_error(5e-4);
    const double coarse = standing_wave_error(1e-3);
    CHECK(fine <= tol::kUnperturbedDistance);
    CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.1));
  }

  TEST_CASE("masses are conserved step by step") {
    EvolveOptions opts;
    const EvolutionTrace tr = evolve(triple().profile, 0.2, 1e-3, one(), opts);
    for (const auto& d : tr.mass_drifts)
      for (std::size_t i = 1; i < d.size(); ++i) CHECK(std::abs(d[i] - d[i - 1]) <= tol::kMassDriftPerStep);
  }

  TEST_CASE("ground-state evolution conserves energy and masses") {
    EvolveOptions opts;
    opts.record_every = 10;
    const EvolutionTrace tr = evolve(triple().profile, 2.0, 1e-3, one(), opts);
    CHECK(tr.max_energy_drift() <= tol::kEnergyDrift);
    CHECK(tr.max_mass_drift() <= tol::kMassDrift);
  }

  TEST_CASE("energy error is second order in dt on a breather") {
    const State breather = cplx(1.2) * triple().profile;
    std::vector<double> dts{4e-3, 2e-3, 1e-3}, errs;
    for (double dt : dts) {
      EvolveOptions opts;
      opts.record_every = 5;
      errs.push_back(evolve(breather, 2.0, dt, one(), opts).max_energy_drift());
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
    CHECK(order >= tol::kSplittingOrderLow);
    CHECK(order <= tol::kSplittingOrderHigh);
  }

  TEST_CASE("forward then backward returns the initial state") {
    const State breather = cplx(1.2) * triple().profile;
    const Evolution fwd = evolve_state(breather, 1.0, 1e-3, one(), {});
    const Evolution back = evolve_state(fwd.final_state, 1.0, -1e-3, one(), {});
    CHECK(y_norm(back.final_state - breather) <= tol::kTimeReversal);
  }

  TEST_CASE("boosted ground state moves at speed 2 sigma") {
    const GroundState g = solve_ground_state(one(), MassTriple(4.0, 0.0, 0.0), box());
    const double sigma = 0.5, T = 4.0;
    const State boosted = apply_symmetry(g.profile, Symmetry{0.0, sigma, {}, 0.0});
    const Evolution ev = evolve_state(boosted, T, 1e-3, one(), {});
    const double speed = (centre_of_mass(ev.final_state) - centre_of_mass(boosted)) / T;
    CHECK(speed == doctest::Approx(2.0 * sigma).epsilon(0.01));
  }
}

TEST_SUITE("evolve bookkeeping") {
  TEST_CASE("zero duration records one row") {
    const EvolutionTrace tr = evolve(triple().profile, 0.0, 1e-3, one(), {});
    REQUIRE(tr.times.size() == 1);
    CHECK(tr.energy_drift[0] == 0.0);
    CHECK(tr.mass_drifts[0][0] == 0.0);
  }

  TEST_CASE("records and snapshots") {
    EvolveOptions opts;
    opts.record_every = 4;
    opts.snapshot_every = 10;
    std::size_t calls = 0;
    opts.observer = [&](double, const State&) { ++calls; };
    const EvolutionTrace tr = evolve(triple().profile, 0.1, 1e-3, one(), opts);
    CHECK(tr.times.size() == 1 + 25);
    CHECK(calls == tr.times.size());
    CHECK(tr.snapshots.size() == 11);
    CHECK(tr.snapshot_times.back() == doctest::Approx(0.1));
    for (const auto& d : tr.mass_drifts) CHECK(d.size() == tr.times.size());
  }

  TEST_CASE("partial last step lands on T") {
    const EvolutionTrace tr = evolve(triple().profile, 0.0105, 1e-3, one(), {});
    CHECK(tr.times.size() == 12);
    CHECK(tr.times.back() == doctest::Approx(0.0105).epsilon(1e-14));
  }

  TEST_CASE("invalid arguments") {
    CHECK_THROWS_AS(evolve(triple().profile, -1.0, 1e-3, one(), {}), InvalidArgument);
    CHECK_THROWS_AS(evolve(triple().profile, 1.0, 0.0, one(), {}), InvalidArgument);
    EvolveOptions opts;
    opts.record_every = 0;
    CHECK_THROWS_AS(evolve(triple().profile, 1.0, 1e-3, one(), opts), InvalidArgument);
  }

  TEST_CASE("overflow is reported as blow-up with the partial trace") {
    State huge = cplx(1e160) * triple().profile;
    EvolveOptions opts;
    opts.record_every = 50;
    try {
      (void)evolve(huge, 1.0, 1e-3, one(), opts);
      FAIL("expected BlowUp");
    } catch (const BlowUp& e) {
      CHECK(e.partial().times.size() >= 1);
      CHECK(e.partial().times.front() == 0.0);
    }
  }

  TEST_CASE("centre of mass of a translated bump") {
    const Field bump = oracle::sample(box(), [](double x) { return oracle::sech(x - 3.0); });
    CHECK(centre_of_mass(State(bump, Field(box()), Field(box()))) == doctest::Approx(3.0).epsilon(1e-6));
  }
}
