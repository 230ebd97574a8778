#pragma once

// Energy, masses and variational structure of the 3-coupled NLS system
//
//   i u_{j,t} + u_{j,xx} + sum_k a_kj |u_k|^p |u_j|^{p-2} u_j = 0,  j = 1,2,3.

#include <array>
#include <utility>

#include "cnls/spectral.hpp"

namespace cnls {

inline constexpr std::size_t kComponents = 3;

/// Symmetric positive coupling matrix and exponent p in [2, 3).
class CouplingModel {
public:
  using Matrix = std::array<std::array<double, kComponents>, kComponents>;

  CouplingModel(const Matrix& a, double p);

  /// All entries equal to `value`.
  static CouplingModel uniform(double value, double p);

  double a(std::size_t k, std::size_t j) const noexcept { return a_[k][j]; }
  const Matrix& matrix() const noexcept { return a_; }
  double p() const noexcept { return p_; }

private:
  Matrix a_;
  double p_;
};

/// Three complex fields on one grid.
class State {
public:
  explicit State(Grid grid);
  State(Field u1, Field u2, Field u3);

  const Grid& grid() const noexcept { return grid_; }
  const Field& operator[](std::size_t j) const noexcept { return u_[j]; }
  Field& operator[](std::size_t j) noexcept { return u_[j]; }

  bool finite() const noexcept;

  State& operator+=(const State& other);
  State& operator-=(const State& other);
  State& operator*=(cplx scale) noexcept;

private:
  Grid grid_;
  std::array<Field, kComponents> u_;
};

State operator+(State a, const State& b);
State operator-(State a, const State& b);
State operator*(cplx s, State a);

struct MassTriple {
  double r = 0.0;
  double s = 0.0;
  double t = 0.0;

  MassTriple() = default;
  MassTriple(double r, double s, double t);

  double operator[](std::size_t j) const noexcept { return j == 0 ? r : (j == 1 ? s : t); }
  double total() const noexcept { return r + s + t; }
};

struct Multipliers {
  std::array<double, kComponents> w{};
  double operator[](std::size_t j) const noexcept { return w[j]; }
};

std::array<double, kComponents> masses(const State& s);

/// Product H^1 norm over the three components.
double y_norm(const State& s);
/// sum_j h1_inner(f_j, g_j).
cplx y_inner(const State& f, const State& g);

/// sum_k a_kj |u_k|^p |u_j|^{p-2} u_j, the nonlinear force on component j.
/// Zero wherever u_j = 0.
Field nonlinearity(const State& s, const CouplingModel& model, std::size_t j);

double kinetic_energy(const Field& f);
double energy(const State& s, const CouplingModel& model);

/// Per-component splitting used by the strict-negativity diagnostic:
/// int |u_j'|^2 - (1/p) int |u_j|^p sum_k a_jk |u_k|^p.
double component_energy(const State& s, const CouplingModel& model, std::size_t j);

/// G_j = -u_j'' - nonlinearity_j. The first variation of the energy along
/// delta is 2 Re <G, delta>_{L^2}.
State energy_gradient(const State& s, const CouplingModel& model);

/// max_j ||G_j + w_j u_j|| / ||u_j|| over components with non-zero mass.
double el_residual(const State& s, const Multipliers& w, const CouplingModel& model);

/// w_j = -(int |u_j'|^2 - int |u_j|^p sum_k a_jk |u_k|^p) / int |u_j|^2.
/// Zero-mass components get w_j = 0 when `skip_empty` is set and raise
/// UndefinedMultiplier otherwise.
Multipliers lagrange_multipliers(const State& s, const CouplingModel& model, bool skip_empty = true);

/// Positive solution of -psi'' + sigma psi = a |psi|^{2p-2} psi.
Field sech_profile(double sigma, double a, double p, const Grid& grid);

/// sqrt(2 Omega / (1 + beta)) sech(sqrt(Omega) x), both components (p = 2).
std::pair<Field, Field> two_component_profile(double omega, double beta, const Grid& grid);

/// The single-component state (sech_profile, 0, 0) with mass r at p = 2, a = 1.
/// lambda(r, 0, 0) = -r^3 / 48 and w = (r/4)^2.
double single_component_lambda(double r);

/// Galilean and phase transformation at time t:
///   u_j -> exp(-i sigma^2 t + i sigma x + i beta_j) u_j(x - y).
struct Symmetry {
  double shift = 0.0;
  double boost = 0.0;
  std::array<double, kComponents> phases{};
  double time = 0.0;
};

State apply_symmetry(const State& s, const Symmetry& g);

}  // namespace cnls
