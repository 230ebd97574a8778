#pragma once

// Periodic spectral discretization on a uniform 1-D grid.

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace cnls {

using cplx = std::complex<double>;

class FftPlan;

/// Uniform periodic grid on [-L/2, L/2) with n nodes.
///
/// Copies are cheap: nodes, wavenumbers and the transform plan live in a
/// shared immutable block.
class Grid {
public:
  Grid(std::size_t n, double length);

  std::size_t size() const noexcept { return n_; }
  double length() const noexcept { return length_; }
  double spacing() const noexcept { return length_ / static_cast<double>(n_); }

  std::span<const double> nodes() const noexcept;
  /// Derivative wavenumbers; the Nyquist entry is zero.
  std::span<const double> wavenumbers() const noexcept;
  const FftPlan& fft() const noexcept;

  double node(std::size_t m) const noexcept { return nodes()[m]; }

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.n_ == b.n_ && a.length_ == b.length_;
  }

private:
  struct Data;
  std::size_t n_;
  double length_;
  std::shared_ptr<const Data> data_;
};

Grid make_grid(std::size_t n, double length);

/// Forward/backward complex DFT of a fixed size. Unnormalized in both
/// directions, like FFTW. Executing is thread-safe; plan creation is guarded.
class FftPlan {
public:
  explicit FftPlan(std::size_t n);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t size() const noexcept { return n_; }
  void forward(std::span<const cplx> in, std::span<cplx> out) const;
  void backward(std::span<const cplx> in, std::span<cplx> out) const;

private:
  std::size_t n_;
  void* forward_;
  void* backward_;
};

/// Complex samples on a grid.
class Field {
public:
  explicit Field(Grid grid);
  Field(Grid grid, std::vector<cplx> values);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const cplx> values() const noexcept { return values_; }
  std::span<cplx> values() noexcept { return values_; }
  cplx operator[](std::size_t m) const noexcept { return values_[m]; }
  cplx& operator[](std::size_t m) noexcept { return values_[m]; }

  bool finite() const noexcept;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(cplx scale) noexcept;

private:
  Grid grid_;
  std::vector<cplx> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(cplx s, Field a);

/// Non-negative real samples on a grid.
class RealField {
public:
  explicit RealField(Grid grid);
  RealField(Grid grid, std::vector<double> values);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t m) const noexcept { return values_[m]; }

private:
  Grid grid_;
  std::vector<double> values_;
};

/// |f| sample-wise.
RealField modulus(const Field& f);
Field to_field(const RealField& f);

Field spectral_derivative(const Field& f);
/// -f'' via multiplication by k^2.
Field negative_laplacian(const Field& f);

/// Rectangle rule h * sum f(x_m).
double integrate(const Grid& grid, std::span<const double> samples);
double mass(const Field& f);
cplx l2_inner(const Field& f, const Field& g);
cplx h1_inner(const Field& f, const Field& g);
double h1_norm(const Field& f);

/// Discrete symmetric decreasing rearrangement.
///
/// Samples are sorted in descending order (stable on the original index) and
/// placed at the centre node, then +h, -h, +2h, -2h, ... The node at -L/2 is
/// filled last.
RealField rearrange(const RealField& f);

/// Sum of (f_{m+1} - f_m)^2 / h over the periodic grid: the Dirichlet energy
/// of the piecewise-linear interpolant of the samples.
double linear_kinetic_energy(const RealField& f);

/// Dirichlet energy of the symmetric decreasing rearrangement of the
/// piecewise-linear interpolant of f >= 0, computed from its distribution
/// function. Never exceeds linear_kinetic_energy(f) up to round-off. When
/// three or more samples fall in one level band the permutation in
/// rearrange() leaves a staircase whose derivative norm is far above this
/// value, so derivative comparisons after merging bumps use this instead.
double rearranged_kinetic_energy(const RealField& f);

/// Node indices in rearrangement placement order.
std::vector<std::size_t> placement_order(const Grid& grid);

/// Cyclic shift by a whole number of grid steps: out(x) = f(x - shift*h).
Field shift_by_steps(const Field& f, std::ptrdiff_t shift);
/// Spectral (band-limited) translation: out(x) = f(x - y).
Field translate(const Field& f, double y);

}  // namespace cnls
