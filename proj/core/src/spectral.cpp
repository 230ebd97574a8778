#include "cnls/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fftw3.h>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>

#include "cnls/error.hpp"

namespace cnls {

namespace {

// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw GridMismatch(std::string(what) + ": operands live on different grids");
}

}  // namespace

// ---------------------------------------------------------------------------
// FftPlan

FftPlan::FftPlan(std::size_t n) : n_(n) {
  std::vector<cplx> scratch_in(n), scratch_out(n);
  auto* in = reinterpret_cast<fftw_complex*>(scratch_in.data());
  auto* out = reinterpret_cast<fftw_complex*>(scratch_out.data());
  const int size = static_cast<int>(n);
  std::lock_guard lock(planner_mutex());
  forward_ = fftw_plan_dft_1d(size, in, out, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  backward_ = fftw_plan_dft_1d(size, in, out, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
}

FftPlan::~FftPlan() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

void FftPlan::forward(std::span<const cplx> in, std::span<cplx> out) const {
  // fftw_execute_dft never writes to its input for out-of-place plans.
  fftw_execute_dft(static_cast<fftw_plan>(forward_),
                   reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

void FftPlan::backward(std::span<const cplx> in, std::span<cplx> out) const {
  fftw_execute_dft(static_cast<fftw_plan>(backward_),
                   reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

// ---------------------------------------------------------------------------
// Grid

struct Grid::Data {
  std::vector<double> nodes;
  std::vector<double> wavenumbers;
  FftPlan fft;

  Data(std::size_t n, double length) : nodes(n), wavenumbers(n), fft(n) {
    const double h = length / static_cast<double>(n);
    const double dk = 2.0 * std::numbers::pi / length;
    for (std::size_t m = 0; m < n; ++m) {
      nodes[m] = -0.5 * length + static_cast<double>(m) * h;
      if (m < n / 2)
        wavenumbers[m] = dk * static_cast<double>(m);
      else if (m > n / 2)
        wavenumbers[m] = -dk * static_cast<double>(n - m);
      else
        wavenumbers[m] = 0.0;
    }
  }
};

Grid::Grid(std::size_t n, double length) : n_(n), length_(length) {
  if (!is_power_of_two(n) || n < 16)
    throw InvalidArgument("grid size " + std::to_string(n) + " is not a power of two >= 16");
  if (!(length > 0.0) || !std::isfinite(length))
    throw InvalidArgument("grid length must be positive and finite");
  data_ = std::make_shared<const Data>(n, length);
}

std::span<const double> Grid::nodes() const noexcept { return data_->nodes; }
std::span<const double> Grid::wavenumbers() const noexcept { return data_->wavenumbers; }
const FftPlan& Grid::fft() const noexcept { return data_->fft; }

Grid make_grid(std::size_t n, double length) { return Grid(n, length); }

// ---------------------------------------------------------------------------
// Field / RealField

Field::Field(Grid grid) : grid_(std::move(grid)), values_(grid_.size()) {}

Field::Field(Grid grid, std::vector<cplx> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw InvalidArgument("field length " + std::to_string(values_.size()) +
                          " does not match grid size " + std::to_string(grid_.size()));
}

bool Field::finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](cplx z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(grid_, other.grid_, "field addition");
  for (std::size_t m = 0; m < values_.size(); ++m) values_[m] += other.values_[m];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(grid_, other.grid_, "field subtraction");
  for (std::size_t m = 0; m < values_.size(); ++m) values_[m] -= other.values_[m];
  return *this;
}

Field& Field::operator*=(cplx scale) noexcept {
  for (auto& v : values_) v *= scale;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(cplx s, Field a) { return a *= s; }

RealField::RealField(Grid grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

RealField::RealField(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw InvalidArgument("real field length does not match grid size");
  for (double v : values_)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidArgument("real field samples must be finite and non-negative");
}

RealField modulus(const Field& f) {
  std::vector<double> out(f.size());
  for (std::size_t m = 0; m < f.size(); ++m) out[m] = std::abs(f[m]);
  return RealField(f.grid(), std::move(out));
}

Field to_field(const RealField& f) {
  std::vector<cplx> out(f.values().begin(), f.values().end());
  return Field(f.grid(), std::move(out));
}

// ---------------------------------------------------------------------------
// Differentiation and quadrature

namespace {

template <class Multiplier>
Field apply_multiplier(const Field& f, Multiplier&& mult) {
  const Grid& g = f.grid();
  const std::size_t n = g.size();
  std::vector<cplx> spec(n);
  g.fft().forward(f.values(), spec);
  const auto k = g.wavenumbers();
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t m = 0; m < n; ++m) spec[m] *= mult(k[m]) * inv_n;
  Field out(g);
  g.fft().backward(spec, out.values());
  return out;
}

}  // namespace

Field spectral_derivative(const Field& f) {
  return apply_multiplier(f, [](double k) { return cplx(0.0, k); });
}

Field negative_laplacian(const Field& f) {
  return apply_multiplier(f, [](double k) { return cplx(k * k, 0.0); });
}

double integrate(const Grid& grid, std::span<const double> samples) {
  if (samples.size() != grid.size()) throw InvalidArgument("integrate: sample count mismatch");
  return grid.spacing() * std::accumulate(samples.begin(), samples.end(), 0.0);
}

double mass(const Field& f) {
  double sum = 0.0;
  for (cplx z : f.values()) sum += std::norm(z);
  return f.grid().spacing() * sum;
}

cplx l2_inner(const Field& f, const Field& g) {
  require_same_grid(f.grid(), g.grid(), "l2_inner");
  cplx sum = 0.0;
  for (std::size_t m = 0; m < f.size(); ++m) sum += f[m] * std::conj(g[m]);
  return f.grid().spacing() * sum;
}

cplx h1_inner(const Field& f, const Field& g) {
  require_same_grid(f.grid(), g.grid(), "h1_inner");
  return l2_inner(f, g) + l2_inner(spectral_derivative(f), spectral_derivative(g));
}

double h1_norm(const Field& f) { return std::sqrt(std::max(0.0, h1_inner(f, f).real())); }

// ---------------------------------------------------------------------------
// Rearrangement and translations

std::vector<std::size_t> placement_order(const Grid& grid) {
  const std::size_t n = grid.size();
  const std::size_t centre = n / 2;  // x = 0
  std::vector<std::size_t> order;
  order.reserve(n);
  order.push_back(centre);
  for (std::size_t d = 1; d < n / 2; ++d) {
    order.push_back(centre + d);
    order.push_back(centre - d);
  }
  order.push_back(0);  // x = -L/2 has no mirror partner
  return order;
}

RealField rearrange(const RealField& f) {
  const std::size_t n = f.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const auto v = f.values();
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  const auto order = placement_order(f.grid());
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[order[i]] = v[idx[i]];
  return RealField(f.grid(), std::move(out));
}

double linear_kinetic_energy(const RealField& f) {
  const std::size_t n = f.size();
  double acc = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double d = f[(m + 1) % n] - f[m];
    acc += d * d;
  }
  return acc / f.grid().spacing();
}

double rearranged_kinetic_energy(const RealField& f) {
  // For the rearrangement u*, |x| = mu(y) / 2 where mu is the measure of
  // {u > y}, so the integral of |u*'|^2 equals 4 * integral dy / |mu'(y)|.
  // Each interpolant segment crossing level y adds h / |df| to |mu'(y)|.
  const std::size_t n = f.size();
  const double h = f.grid().spacing();
  for (double v : f.values())
    if (!(v >= 0.0)) throw InvalidArgument("rearranged_kinetic_energy needs non-negative finite samples");

  struct Segment {
    double lo, hi, density;
  };
  std::vector<Segment> segs;
  segs.reserve(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double a = f[m], b = f[(m + 1) % n];
    if (a != b) segs.push_back({std::min(a, b), std::max(a, b), h / std::abs(b - a)});
  }
  if (segs.empty()) return 0.0;

  // Active densities live in a segment tree whose inner nodes are recomputed
  // from their children on every update, so removing a steep tail segment
  // does not leave cancellation error in the running sum.
  std::size_t size = 1;
  while (size < segs.size()) size *= 2;
  std::vector<double> tree(2 * size, 0.0);
  auto assign = [&](std::size_t i, double value) {
    std::size_t k = size + i;
    tree[k] = value;
    for (k /= 2; k >= 1; k /= 2) tree[k] = tree[2 * k] + tree[2 * k + 1];
  };

  std::vector<std::size_t> by_lo(segs.size()), by_hi(segs.size());
  std::iota(by_lo.begin(), by_lo.end(), std::size_t{0});
  by_hi = by_lo;
  std::sort(by_lo.begin(), by_lo.end(), [&](std::size_t a, std::size_t b) { return segs[a].lo < segs[b].lo; });
  std::sort(by_hi.begin(), by_hi.end(), [&](std::size_t a, std::size_t b) { return segs[a].hi < segs[b].hi; });

  std::vector<double> levels(f.values().begin(), f.values().end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  double acc = 0.0;
  std::size_t next_lo = 0, next_hi = 0;
  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    const double y = levels[k];
    while (next_lo < by_lo.size() && segs[by_lo[next_lo]].lo <= y) {
      assign(by_lo[next_lo], segs[by_lo[next_lo]].density);
      ++next_lo;
    }
    while (next_hi < by_hi.size() && segs[by_hi[next_hi]].hi <= y) {
      assign(by_hi[next_hi], 0.0);
      ++next_hi;
    }
    if (tree[1] > 0.0) acc += (levels[k + 1] - y) / tree[1];
  }
  return 4.0 * acc;
}

Field shift_by_steps(const Field& f, std::ptrdiff_t shift) {
  const auto n = static_cast<std::ptrdiff_t>(f.size());
  Field out(f.grid());
  for (std::ptrdiff_t m = 0; m < n; ++m) {
    const std::ptrdiff_t src = ((m - shift) % n + n) % n;
    out[static_cast<std::size_t>(m)] = f[static_cast<std::size_t>(src)];
  }
  return out;
}

Field translate(const Field& f, double y) {
  const double h = f.grid().spacing();
  const double steps = y / h;
  const double whole = std::round(steps);
  if (std::abs(steps - whole) < 1e-12) return shift_by_steps(f, static_cast<std::ptrdiff_t>(whole));
  return apply_multiplier(f, [y](double k) { return std::polar(1.0, -k * y); });
}

}  // namespace cnls
