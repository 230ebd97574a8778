#include "cnls/model.hpp"

#include <cmath>
#include <string>

#include "cnls/error.hpp"

namespace cnls {

namespace {

// |u_k|^p for each component.
std::array<std::vector<double>, kComponents> powered_moduli(const State& s, double p) {
  std::array<std::vector<double>, kComponents> out;
  const std::size_t n = s.grid().size();
  for (std::size_t k = 0; k < kComponents; ++k) {
    out[k].resize(n);
    const auto u = s[k].values();
    if (p == 2.0) {
      for (std::size_t m = 0; m < n; ++m) out[k][m] = std::norm(u[m]);
    } else {
      for (std::size_t m = 0; m < n; ++m) out[k][m] = std::pow(std::abs(u[m]), p);
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// CouplingModel

CouplingModel::CouplingModel(const Matrix& a, double p) : a_(a), p_(p) {
  if (!(p >= 2.0 && p < 3.0))
    throw InvalidArgument("coupling exponent p = " + std::to_string(p) + " is outside [2, 3)");
  for (std::size_t k = 0; k < kComponents; ++k) {
    for (std::size_t j = 0; j < kComponents; ++j) {
      if (!(a[k][j] > 0.0) || !std::isfinite(a[k][j]))
        throw InvalidArgument("coupling a[" + std::to_string(k + 1) + "][" + std::to_string(j + 1) +
                              "] must be positive");
      if (a[k][j] != a[j][k])
        throw InvalidArgument("coupling matrix is not symmetric at (" + std::to_string(k + 1) + "," +
                              std::to_string(j + 1) + ")");
    }
  }
}

CouplingModel CouplingModel::uniform(double value, double p) {
  Matrix a;
  for (auto& row : a) row.fill(value);
  return CouplingModel(a, p);
}

// ---------------------------------------------------------------------------
// State

State::State(Grid grid) : grid_(grid), u_{Field(grid), Field(grid), Field(grid)} {}

State::State(Field u1, Field u2, Field u3)
    : grid_(u1.grid()), u_{std::move(u1), std::move(u2), std::move(u3)} {
  if (!(u_[1].grid() == grid_) || !(u_[2].grid() == grid_))
    throw GridMismatch("state components live on different grids");
}

bool State::finite() const noexcept {
  return u_[0].finite() && u_[1].finite() && u_[2].finite();
}

State& State::operator+=(const State& other) {
  for (std::size_t j = 0; j < kComponents; ++j) u_[j] += other.u_[j];
  return *this;
}

State& State::operator-=(const State& other) {
  for (std::size_t j = 0; j < kComponents; ++j) u_[j] -= other.u_[j];
  return *this;
}

State& State::operator*=(cplx scale) noexcept {
  for (auto& f : u_) f *= scale;
  return *this;
}

State operator+(State a, const State& b) { return a += b; }
State operator-(State a, const State& b) { return a -= b; }
State operator*(cplx s, State a) { return a *= s; }

MassTriple::MassTriple(double r_, double s_, double t_) : r(r_), s(s_), t(t_) {
  if (!(r >= 0.0 && s >= 0.0 && t >= 0.0) || !std::isfinite(r + s + t))
    throw InvalidArgument("masses must be finite and non-negative");
  if (!(r + s + t > 0.0)) throw InvalidArgument("at least one mass must be positive");
}

std::array<double, kComponents> masses(const State& s) {
  return {mass(s[0]), mass(s[1]), mass(s[2])};
}

double y_norm(const State& s) {
  double sum = 0.0;
  for (std::size_t j = 0; j < kComponents; ++j) sum += h1_inner(s[j], s[j]).real();
  return std::sqrt(std::max(0.0, sum));
}

cplx y_inner(const State& f, const State& g) {
  cplx sum = 0.0;
  for (std::size_t j = 0; j < kComponents; ++j) sum += h1_inner(f[j], g[j]);
  return sum;
}

// ---------------------------------------------------------------------------
// Energy and its gradient

Field nonlinearity(const State& s, const CouplingModel& model, std::size_t j) {
  const double p = model.p();
  const auto pm = powered_moduli(s, p);
  const std::size_t n = s.grid().size();
  Field out(s.grid());
  const auto u = s[j].values();
  for (std::size_t m = 0; m < n; ++m) {
    double coeff = 0.0;
    for (std::size_t k = 0; k < kComponents; ++k) coeff += model.a(k, j) * pm[k][m];
    if (p == 2.0) {
      out[m] = coeff * u[m];
    } else {
      const double amp = std::abs(u[m]);
      out[m] = amp > 0.0 ? coeff * std::pow(amp, p - 2.0) * u[m] : cplx(0.0);
    }
  }
  return out;
}

double kinetic_energy(const Field& f) { return mass(spectral_derivative(f)); }

double energy(const State& s, const CouplingModel& model) {
  double kinetic = 0.0;
  for (std::size_t j = 0; j < kComponents; ++j) kinetic += kinetic_energy(s[j]);
  const auto pm = powered_moduli(s, model.p());
  double potential = 0.0;
  for (std::size_t m = 0; m < s.grid().size(); ++m) {
    for (std::size_t k = 0; k < kComponents; ++k)
      for (std::size_t j = 0; j < kComponents; ++j) potential += model.a(k, j) * pm[k][m] * pm[j][m];
  }
  return kinetic - s.grid().spacing() * potential / model.p();
}

double component_energy(const State& s, const CouplingModel& model, std::size_t j) {
  const auto pm = powered_moduli(s, model.p());
  double coupling = 0.0;
  for (std::size_t m = 0; m < s.grid().size(); ++m) {
    double sum = 0.0;
    for (std::size_t k = 0; k < kComponents; ++k) sum += model.a(j, k) * pm[k][m];
    coupling += pm[j][m] * sum;
  }
  return kinetic_energy(s[j]) - s.grid().spacing() * coupling / model.p();
}

State energy_gradient(const State& s, const CouplingModel& model) {
  State g(s.grid());
  for (std::size_t j = 0; j < kComponents; ++j) g[j] = negative_laplacian(s[j]) - nonlinearity(s, model, j);
  return g;
}

double el_residual(const State& s, const Multipliers& w, const CouplingModel& model) {
  const State g = energy_gradient(s, model);
  double worst = 0.0;
  bool any = false;
  for (std::size_t j = 0; j < kComponents; ++j) {
    const double mj = mass(s[j]);
    if (mj == 0.0) continue;
    any = true;
    Field r = g[j];
    for (std::size_t m = 0; m < r.size(); ++m) r[m] += w[j] * s[j][m];
    worst = std::max(worst, std::sqrt(mass(r) / mj));
  }
  if (!any) throw InvalidArgument("el_residual: all components are zero");
  return worst;
}

Multipliers lagrange_multipliers(const State& s, const CouplingModel& model, bool skip_empty) {
  const auto pm = powered_moduli(s, model.p());
  const double h = s.grid().spacing();
  Multipliers w;
  for (std::size_t j = 0; j < kComponents; ++j) {
    const double mj = mass(s[j]);
    if (mj == 0.0) {
      if (skip_empty) continue;
      throw UndefinedMultiplier("component " + std::to_string(j + 1) + " has zero mass");
    }
    double coupling = 0.0;
    for (std::size_t m = 0; m < s.grid().size(); ++m) {
      double sum = 0.0;
      for (std::size_t k = 0; k < kComponents; ++k) sum += model.a(j, k) * pm[k][m];
      coupling += pm[j][m] * sum;
    }
    w.w[j] = -(kinetic_energy(s[j]) - h * coupling) / mj;
  }
  return w;
}

// ---------------------------------------------------------------------------
// Closed-form solutions

Field sech_profile(double sigma, double a, double p, const Grid& grid) {
  if (!(sigma > 0.0) || !(a > 0.0)) throw InvalidArgument("sech_profile: sigma and a must be positive");
  if (!(p >= 2.0 && p < 3.0)) throw InvalidArgument("sech_profile: p must lie in [2, 3)");
  const double q = 2.0 * p - 2.0;
  const double amp = std::pow(sigma * p / a, 1.0 / q);
  const double rate = std::sqrt(sigma) * q / 2.0;
  Field out(grid);
  const auto x = grid.nodes();
  for (std::size_t m = 0; m < grid.size(); ++m) out[m] = amp * std::pow(1.0 / std::cosh(rate * x[m]), 2.0 / q);
  return out;
}

std::pair<Field, Field> two_component_profile(double omega, double beta, const Grid& grid) {
  if (!(omega > 0.0)) throw InvalidArgument("two_component_profile: Omega must be positive");
  if (!(beta > -1.0)) throw InvalidArgument("two_component_profile: beta must exceed -1");
  const double amp = std::sqrt(2.0 * omega / (1.0 + beta));
  const double rate = std::sqrt(omega);
  Field f(grid);
  const auto x = grid.nodes();
  for (std::size_t m = 0; m < grid.size(); ++m) f[m] = amp / std::cosh(rate * x[m]);
  return {f, f};
}

double single_component_lambda(double r) { return -r * r * r / 48.0; }

// ---------------------------------------------------------------------------
// Symmetries

State apply_symmetry(const State& s, const Symmetry& g) {
  State out(s.grid());
  const auto x = s.grid().nodes();
  for (std::size_t j = 0; j < kComponents; ++j) {
    Field moved = g.shift == 0.0 ? s[j] : translate(s[j], g.shift);
    const double base = -g.boost * g.boost * g.time + g.phases[j];
    if (g.boost == 0.0) {
      moved *= std::polar(1.0, base);
    } else {
      for (std::size_t m = 0; m < moved.size(); ++m) moved[m] *= std::polar(1.0, base + g.boost * x[m]);
    }
    out[j] = std::move(moved);
  }
  return out;
}

}  // namespace cnls
