#pragma once

// Reference values computed without the library's transforms: closed forms,
// direct sums and brute-force scans.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "cnls/model.hpp"

namespace oracle {

using cplx = std::complex<double>;

inline double sech(double x) { return 1.0 / std::cosh(x); }

/// lambda(r, 0, 0) for a_11 = alpha, p = 2: -alpha^2 r^3 / 48.
inline double single_lambda(double r, double alpha = 1.0) { return -alpha * alpha * r * r * r / 48.0; }

/// Ground state amplitude * sech(kappa x) of the cubic single-component
/// problem at mass r: alpha A^2 = 2 kappa^2, mass 4 kappa / alpha.
struct SechSoliton {
  double amplitude;
  double kappa;
  double omega;
};

inline SechSoliton single_soliton(double r, double alpha = 1.0) {
  const double kappa = alpha * r / 4.0;
  return {std::sqrt(2.0 / alpha) * kappa, kappa, kappa * kappa};
}

/// Energy of amplitude * sech(kappa x) for the cubic single-component
/// functional, from the integrals of sech^2 tanh^2 = 2/3 and sech^4 = 4/3.
inline double sech_energy(double amplitude, double kappa, double alpha) {
  const double kinetic = amplitude * amplitude * kappa * (2.0 / 3.0);
  const double potential = 0.5 * alpha * std::pow(amplitude, 4) * (4.0 / 3.0) / kappa;
  return kinetic - potential;
}

/// Field of samples f(x_m).
template <class F>
cnls::Field sample(const cnls::Grid& grid, F&& f) {
  cnls::Field out(grid);
  for (std::size_t m = 0; m < grid.size(); ++m) out[m] = f(grid.node(m));
  return out;
}

/// Direct rectangle-rule integral of |f|^2 without the library.
inline double direct_mass(const cnls::Field& f) {
  double acc = 0.0;
  for (std::size_t m = 0; m < f.size(); ++m) acc += std::norm(f[m]);
  return acc * f.grid().spacing();
}

/// Spectral derivative by direct O(n^2) DFT.
inline cnls::Field dft_derivative(const cnls::Field& f) {
  const std::size_t n = f.size();
  const double L = f.grid().length();
  std::vector<cplx> spec(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (std::size_t m = 0; m < n; ++m)
      acc += f[m] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * m % n) / static_cast<double>(n));
    spec[k] = acc;
  }
  cnls::Field out(f.grid());
  for (std::size_t m = 0; m < n; ++m) {
    cplx acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double idx = k < n / 2 ? static_cast<double>(k) : (k == n / 2 ? 0.0 : static_cast<double>(k) - static_cast<double>(n));
      const double wave = 2.0 * std::numbers::pi * idx / L;
      acc += cplx(0.0, wave) * spec[k] *
             std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k * m % n) / static_cast<double>(n));
    }
    out[m] = acc / static_cast<double>(n);
  }
  return out;
}

/// Smooth localized random field: a few Gaussian bumps with random centres,
/// widths, amplitudes and linear phases.
inline cnls::Field smooth_random(const cnls::Grid& grid, std::mt19937_64& rng, int bumps = 3, double spread = 4.0) {
  std::normal_distribution<double> normal;
  cnls::Field f(grid);
  for (int b = 0; b < bumps; ++b) {
    const double centre = spread * normal(rng);
    const double width = 0.8 + std::abs(normal(rng));
    const double wave = normal(rng);
    const cplx amp(normal(rng), normal(rng));
    for (std::size_t m = 0; m < grid.size(); ++m) {
      const double y = (grid.node(m) - centre) / width;
      f[m] += amp * std::exp(-y * y) * std::polar(1.0, wave * y);
    }
  }
  return f;
}

inline cnls::State smooth_random_state(const cnls::Grid& grid, std::mt19937_64& rng) {
  return cnls::State(smooth_random(grid, rng), smooth_random(grid, rng), smooth_random(grid, rng));
}

inline cnls::CouplingModel random_model(std::mt19937_64& rng, double p) {
  std::uniform_real_distribution<double> u(0.5, 2.0);
  cnls::CouplingModel::Matrix a{};
  for (std::size_t i = 0; i < cnls::kComponents; ++i)
    for (std::size_t j = i; j < cnls::kComponents; ++j) a[i][j] = a[j][i] = u(rng);
  return cnls::CouplingModel(a, p);
}

}  // namespace oracle
