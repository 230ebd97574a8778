#include "cnls/stability.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>

#include "cnls/tolerances.hpp"

namespace cnls {

namespace {

// Caches the spectra of the representative so that repeated fits against
// evolving states only transform the state.
class OrbitFitter {
public:
  explicit OrbitFitter(const State& profile) : profile_(profile), grid_(profile.grid()) {
    const std::size_t n = grid_.size();
    const auto k = grid_.wavenumbers();
    weight_.resize(n);
    for (std::size_t m = 0; m < n; ++m) weight_[m] = 1.0 + k[m] * k[m];
    for (std::size_t j = 0; j < kComponents; ++j) {
      spec_[j].resize(n);
      grid_.fft().forward(profile[j].values(), spec_[j]);
    }
  }

  OrbitalFit fit(const State& s, bool subgrid) const {
    if (!(s.grid() == grid_)) throw GridMismatch("orbital distance: state and profile grids differ");
    const std::size_t n = grid_.size();
    const double h = grid_.spacing();
    const double scale = h / static_cast<double>(n);

    std::array<std::vector<cplx>, kComponents> coeff;  // (h/n) w S^ conj(Phi^)
    std::array<std::vector<cplx>, kComponents> corr;
    std::vector<cplx> sspec(n);
    for (std::size_t j = 0; j < kComponents; ++j) {
      grid_.fft().forward(s[j].values(), sspec);
      coeff[j].resize(n);
      for (std::size_t m = 0; m < n; ++m) {
        coeff[j][m] = scale * weight_[m] * sspec[m] * std::conj(spec_[j][m]);
      }
      corr[j].resize(n);
      grid_.fft().backward(coeff[j], corr[j]);  // corr[j][q] = <S_j, Phi_j(. - q h)>_{H^1}
    }

    std::size_t best_q = 0;
    double best_val = -1.0;
    for (std::size_t q = 0; q < n; ++q) {
      double v = 0.0;
      for (std::size_t j = 0; j < kComponents; ++j) v += std::abs(corr[j][q]);
      if (v > best_val) {
        best_val = v;
        best_q = q;
      }
    }
    const auto signed_q = static_cast<std::ptrdiff_t>(best_q) - (best_q > n / 2 ? static_cast<std::ptrdiff_t>(n) : 0);

    OrbitalFit grid_fit;
    grid_fit.shift = static_cast<double>(signed_q) * h;
    for (std::size_t j = 0; j < kComponents; ++j) grid_fit.phases[j] = std::arg(corr[j][best_q]);
    grid_fit.distance = point_distance(s, grid_fit.shift, grid_fit.phases);
    if (!subgrid) return grid_fit;

    OrbitalFit refined = refine(s, coeff, grid_fit.shift);
    return refined.distance < grid_fit.distance ? refined : grid_fit;
  }

  double point_distance(const State& s, double shift, const std::array<double, kComponents>& phases) const {
    double sum = 0.0;
    for (std::size_t j = 0; j < kComponents; ++j) {
      Field diff = s[j] - std::polar(1.0, phases[j]) * translate(profile_[j], shift);
      sum += h1_inner(diff, diff).real();
    }
    return std::sqrt(std::max(0.0, sum));
  }

private:
  // Newton's method on F(y) = sum_j |c_j(y)| inside [y0 - h, y0 + h].
  OrbitalFit refine(const State& s, const std::array<std::vector<cplx>, kComponents>& coeff, double y0) const {
    const std::size_t n = grid_.size();
    const auto k = grid_.wavenumbers();
    const double h = grid_.spacing();
    std::vector<cplx> rot(n);

    struct Eval {
      double f, df, d2f;
      std::array<cplx, kComponents> c;
    };
    auto eval = [&](double y) {
      for (std::size_t m = 0; m < n; ++m) rot[m] = std::polar(1.0, k[m] * y);
      Eval e{0.0, 0.0, 0.0, {}};
      for (std::size_t j = 0; j < kComponents; ++j) {
        cplx c = 0.0, c1 = 0.0, c2 = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
          const cplx term = coeff[j][m] * rot[m];
          c += term;
          c1 += cplx(0.0, k[m]) * term;
          c2 -= k[m] * k[m] * term;
        }
        e.c[j] = c;
        const double a = std::abs(c);
        if (a == 0.0) continue;
        const double re1 = (std::conj(c) * c1).real();
        e.f += a;
        e.df += re1 / a;
        e.d2f += (std::norm(c1) + (std::conj(c) * c2).real()) / a - re1 * re1 / (a * a * a);
      }
      return e;
    };

    const double lo = y0 - h, hi = y0 + h;
    double y = y0;
    Eval cur = eval(y);
    for (int it = 0; it < 30; ++it) {
      double trial;
      if (cur.d2f < 0.0)
        trial = std::clamp(y - cur.df / cur.d2f, lo, hi);
      else
        trial = cur.df > 0.0 ? 0.5 * (y + hi) : 0.5 * (y + lo);
      Eval next = eval(trial);
      int halvings = 0;
      while (next.f < cur.f && halvings < 40) {
        trial = 0.5 * (y + trial);
        next = eval(trial);
        ++halvings;
      }
      if (next.f < cur.f) break;
      const double moved = std::abs(trial - y);
      y = trial;
      cur = next;
      if (moved < 1e-15 * std::max(1.0, std::abs(y))) break;
    }

    OrbitalFit out;
    out.shift = y;
    for (std::size_t j = 0; j < kComponents; ++j) out.phases[j] = std::arg(cur.c[j]);
    out.distance = point_distance(s, y, out.phases);
    return out;
  }

  State profile_;
  Grid grid_;
  std::vector<double> weight_;
  std::array<std::vector<cplx>, kComponents> spec_;
};

Field smooth_random_field(const Grid& grid, std::mt19937_64& rng) {
  const std::size_t n = grid.size();
  const auto k = grid.wavenumbers();
  const auto x = grid.nodes();
  std::normal_distribution<double> normal;
  std::vector<cplx> spec(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double envelope = std::exp(-0.5 * k[m] * k[m]);
    spec[m] = envelope * cplx(normal(rng), normal(rng));
  }
  Field f(grid);
  grid.fft().backward(spec, f.values());
  for (std::size_t m = 0; m < n; ++m) f[m] *= 1.0 / std::cosh(0.25 * x[m]);
  return f;
}

}  // namespace

OrbitalFit orbital_fit(const State& s, const State& profile, bool subgrid) {
  return OrbitFitter(profile).fit(s, subgrid);
}

double orbital_distance(const State& s, const GroundState& g) { return orbital_fit(s, g.profile).distance; }

double orbit_point_distance(const State& s, const State& profile, double shift,
                            const std::array<double, kComponents>& phases) {
  if (!(s.grid() == profile.grid())) throw GridMismatch("orbital distance: state and profile grids differ");
  return OrbitFitter(profile).point_distance(s, shift, phases);
}

State perturbation_direction(const State& s, PerturbationKind kind, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  State eta(s.grid());
  if (kind == PerturbationKind::component_tilt) {
    std::normal_distribution<double> normal;
    for (std::size_t j = 0; j < kComponents; ++j) eta[j] = cplx(normal(rng), 0.0) * s[j];
  } else {
    for (std::size_t j = 0; j < kComponents; ++j) eta[j] = smooth_random_field(s.grid(), rng);
  }
  const double norm = y_norm(eta);
  if (norm > 0.0) eta *= 1.0 / norm;
  return eta;
}

State perturb(const State& s, PerturbationKind kind, double amplitude, std::uint64_t seed) {
  if (!(amplitude >= 0.0)) throw InvalidArgument("perturbation amplitude must be non-negative");
  if (amplitude == 0.0) return s;
  State out = s + cplx(amplitude) * perturbation_direction(s, kind, seed);
  if (kind == PerturbationKind::mass_preserving_random) {
    const auto q = masses(s);
    for (std::size_t j = 0; j < kComponents; ++j) {
      if (q[j] == 0.0) {
        out[j] = Field(s.grid());
        continue;
      }
      out[j] *= std::sqrt(q[j] / mass(out[j]));
    }
  }
  return out;
}

StabilityReport stability_experiment(const GroundState& g, const CouplingModel& model, const StabilityConfig& cfg) {
  if (!(cfg.delta >= 0.0)) throw InvalidArgument("stability: delta must be non-negative");
  if (cfg.sample_every == 0) throw InvalidArgument("stability: sample_every must be positive");

  StabilityReport rep;
  rep.delta = cfg.delta;
  if (cfg.eps > 0.0)
    rep.eps = cfg.eps;
  else
    rep.eps = cfg.delta > 0.0 ? tol::kDefaultEpsOverDelta * cfg.delta : tol::kUnperturbedDistance;
  rep.seed = cfg.seed;

  const OrbitFitter fitter(g.profile);
  const State start = perturb(g.profile, cfg.kind, cfg.delta, cfg.seed);
  std::vector<double> distances;

  EvolveOptions opts;
  opts.record_every = cfg.sample_every;
  opts.observer = [&](double t, const State& s) {
    rep.times_sampled.push_back(t);
    distances.push_back(fitter.fit(s, true).distance);
  };

  try {
    rep.trace = evolve(start, cfg.T, cfg.dt, model, opts);
    rep.verdict = Verdict::bounded;
  } catch (const BlowUp& e) {
    rep.trace = e.partial();
    rep.verdict = Verdict::blow_up;
  }
  rep.trace.orbital_distance = distances;
  rep.initial_distance = distances.empty() ? 0.0 : distances.front();
  rep.sup_distance = distances.empty() ? 0.0 : *std::max_element(distances.begin(), distances.end());
  if (rep.verdict != Verdict::blow_up && rep.sup_distance > rep.eps) rep.verdict = Verdict::escaped;

  // Sustained rise (5 consecutive increases) followed by a drop below half the peak.
  std::size_t rising = 0;
  double peak_after_rise = -1.0;
  for (std::size_t i = 1; i < distances.size(); ++i) {
    rising = distances[i] > distances[i - 1] ? rising + 1 : 0;
    if (rising >= 5) peak_after_rise = std::max(peak_after_rise, distances[i]);
    if (peak_after_rise > 0.0 && distances[i] < 0.5 * peak_after_rise) rep.representative_switch_suspected = true;
  }
  return rep;
}

std::vector<StabilityReport> stability_ensemble(const GroundState& g, const CouplingModel& model,
                                                const StabilityConfig& cfg, const std::vector<std::uint64_t>& seeds) {
  std::vector<std::future<StabilityReport>> jobs;
  jobs.reserve(seeds.size());
  for (std::uint64_t seed : seeds) {
    StabilityConfig c = cfg;
    c.seed = seed;
    jobs.push_back(std::async(std::launch::async, [&g, &model, c] { return stability_experiment(g, model, c); }));
  }
  std::vector<StabilityReport> out;
  out.reserve(jobs.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::bounded: return "bounded";
    case Verdict::escaped: return "escaped";
    case Verdict::blow_up: return "blow_up";
  }
  return "unknown";
}

const char* to_string(PerturbationKind k) noexcept {
  switch (k) {
    case PerturbationKind::random_h1: return "random_h1";
    case PerturbationKind::mass_preserving_random: return "mass_preserving_random";
    case PerturbationKind::component_tilt: return "component_tilt";
  }
  return "unknown";
}

}  // namespace cnls
