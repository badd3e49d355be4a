#include "rtmri/nufft.hpp"

#include "rtmri/fft.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace rtmri {

void RadialTrajectory::validate() const
{
  if (spokes < 0 || samples_per_spoke < 0 ||
      samples.size() != static_cast<std::size_t>(spokes) * static_cast<std::size_t>(samples_per_spoke)) {
    throw InvalidArgument("trajectory: sample count must equal spokes * samples_per_spoke");
  }
  if (spoke_times.size() != static_cast<std::size_t>(spokes)) {
    throw InvalidArgument("trajectory: one timestamp per spoke required");
  }
  if (!std::is_sorted(spoke_times.begin(), spoke_times.end())) {
    throw InvalidArgument("trajectory: spoke times must be nondecreasing");
  }
  for (auto const &k : samples) {
    if (!(k.kx >= -0.5 && k.kx < 0.5 && k.ky >= -0.5 && k.ky < 0.5)) {
      throw InvalidArgument("trajectory: sample outside [-0.5, 0.5)");
    }
  }
}

KbTable::KbTable(int image_size, int kernel_width, double beta, double oversampling, int resolution)
  : image_size_(image_size), kernel_width_(kernel_width), beta_(beta), oversampling_(oversampling),
    resolution_(resolution)
{
  if (image_size < 2) { throw InvalidArgument("KbTable: image size must be >= 2"); }
  if (kernel_width < 2 || kernel_width % 2 != 0) { throw InvalidArgument("KbTable: kernel width must be even and >= 2"); }
  if (!(beta > 0.0)) { throw InvalidArgument("KbTable: beta must be positive"); }
  if (!(oversampling > 1.0)) { throw InvalidArgument("KbTable: oversampling must exceed 1"); }
  if (resolution < 100) { throw InvalidArgument("KbTable: resolution must be >= 100 entries per cell"); }

  grid_size_ = static_cast<int>(std::ceil(oversampling * image_size - 1e-9));

  int const half = kernel_width / 2;
  table_.resize(static_cast<std::size_t>(half) * resolution + 2);
  for (std::size_t i = 0; i < table_.size(); ++i) {
    table_[i] = kernel_exact(static_cast<double>(i) / resolution);
  }

  deapod_.resize(image_size);
  double peak = 0.0;
  std::vector<double> transform(image_size);
  for (int i = 0; i < image_size; ++i) {
    transform[i] = kernel_transform(static_cast<double>(i - image_size / 2) / grid_size_);
    peak = std::max(peak, std::abs(transform[i]));
  }
  double const floor = 1e-8 * peak;
  for (int i = 0; i < image_size; ++i) {
    double t = transform[i];
    if (std::abs(t) < floor) { t = floor; }
    deapod_[i] = 1.0 / t;
  }
}

double KbTable::kernel_exact(double r) const
{
  double const u = 2.0 * std::abs(r) / kernel_width_;
  if (u >= 1.0) { return 0.0; }
  return std::cyl_bessel_i(0.0, beta_ * std::sqrt(1.0 - u * u)) / std::cyl_bessel_i(0.0, beta_);
}

double KbTable::kernel(double r) const
{
  double const t = std::abs(r) * resolution_;
  if (t >= static_cast<double>(kernel_width_ / 2) * resolution_) { return 0.0; }
  auto const i = static_cast<std::size_t>(t);
  double const frac = t - static_cast<double>(i);
  return table_[i] + frac * (table_[i + 1] - table_[i]);
}

double KbTable::kernel_transform(double xi) const
{
  double const pl = std::numbers::pi * kernel_width_ * xi;
  double const z = beta_ * beta_ - pl * pl;
  double shape = 1.0;
  if (z > 0.0) {
    double const s = std::sqrt(z);
    shape = std::sinh(s) / s;
  } else if (z < 0.0) {
    double const s = std::sqrt(-z);
    shape = std::sin(s) / s;
  }
  return kernel_width_ * shape / std::cyl_bessel_i(0.0, beta_);
}

RealImage KbTable::deapodization() const
{
  RealImage out(image_size_, image_size_);
  for (int y = 0; y < image_size_; ++y) {
    for (int x = 0; x < image_size_; ++x) { out(x, y) = deapod_[x] * deapod_[y]; }
  }
  return out;
}

KbTable build_kb_table(int image_size, KbParams const &params)
{
  return KbTable(image_size, params.kernel_width, params.beta, params.oversampling, params.resolution);
}

namespace {

constexpr int kMaxTaps = 17;

// Interpolation footprint of one sample along one axis.
struct Footprint {
  int first = 0;
  int count = 0;
  std::array<double, kMaxTaps> weight{};
};

Footprint footprint(double k, KbTable const &tbl)
{
  int const grid = tbl.grid_size();
  double const half = tbl.kernel_width() / 2.0;
  double const u = k * grid;
  Footprint f;
  f.first = static_cast<int>(std::ceil(u - half));
  int const last = static_cast<int>(std::floor(u + half));
  f.count = std::min(last - f.first + 1, kMaxTaps);
  for (int i = 0; i < f.count; ++i) { f.weight[i] = tbl.kernel(u - (f.first + i)); }
  return f;
}

inline int wrap(int i, int n)
{
  int const r = i % n;
  return r < 0 ? r + n : r;
}

void check_sample(KPoint const &k)
{
  if (!(k.kx >= -0.5 && k.kx < 0.5 && k.ky >= -0.5 && k.ky < 0.5)) {
    throw InvalidArgument("nufft: trajectory point outside [-0.5, 0.5)");
  }
}

} // namespace

SampleVector nufft_forward(ComplexImage const &img, RadialTrajectory const &traj, KbTable const &tbl)
{
  int const n = tbl.image_size();
  if (img.width() != n || img.height() != n) { throw InvalidArgument("nufft_forward: image does not match table size"); }
  int const grid = tbl.grid_size();
  auto const &d = tbl.deapodization_1d();

  std::vector<cdouble> g(static_cast<std::size_t>(grid) * grid);
  for (int y = 0; y < n; ++y) {
    int const gy = wrap(y - n / 2, grid);
    for (int x = 0; x < n; ++x) {
      int const gx = wrap(x - n / 2, grid);
      g[static_cast<std::size_t>(gy) * grid + gx] = img(x, y) * (d[x] * d[y]);
    }
  }
  fft::forward(g, grid, grid);

  SampleVector out(traj.samples.size());
  for (std::size_t j = 0; j < traj.samples.size(); ++j) {
    auto const &k = traj.samples[j];
    check_sample(k);
    auto const fx = footprint(k.kx, tbl);
    auto const fy = footprint(k.ky, tbl);
    cdouble acc{};
    for (int iy = 0; iy < fy.count; ++iy) {
      std::size_t const row = static_cast<std::size_t>(wrap(fy.first + iy, grid)) * grid;
      cdouble racc{};
      for (int ix = 0; ix < fx.count; ++ix) { racc += fx.weight[ix] * g[row + wrap(fx.first + ix, grid)]; }
      acc += fy.weight[iy] * racc;
    }
    out[j] = acc;
  }
  return out;
}

ComplexImage nufft_adjoint(std::span<cdouble const> samples, RadialTrajectory const &traj, KbTable const &tbl)
{
  if (samples.size() != traj.samples.size()) { throw InvalidArgument("nufft_adjoint: sample count mismatch"); }
  int const n = tbl.image_size();
  int const grid = tbl.grid_size();
  auto const &d = tbl.deapodization_1d();

  std::vector<cdouble> g(static_cast<std::size_t>(grid) * grid);
  for (std::size_t j = 0; j < samples.size(); ++j) {
    auto const &k = traj.samples[j];
    check_sample(k);
    auto const fx = footprint(k.kx, tbl);
    auto const fy = footprint(k.ky, tbl);
    for (int iy = 0; iy < fy.count; ++iy) {
      std::size_t const row = static_cast<std::size_t>(wrap(fy.first + iy, grid)) * grid;
      cdouble const v = fy.weight[iy] * samples[j];
      for (int ix = 0; ix < fx.count; ++ix) { g[row + wrap(fx.first + ix, grid)] += fx.weight[ix] * v; }
    }
  }
  fft::backward(g, grid, grid);

  ComplexImage out(n, n);
  for (int y = 0; y < n; ++y) {
    int const gy = wrap(y - n / 2, grid);
    for (int x = 0; x < n; ++x) {
      int const gx = wrap(x - n / 2, grid);
      out(x, y) = g[static_cast<std::size_t>(gy) * grid + gx] * (d[x] * d[y]);
    }
  }
  return out;
}

PsfKernel::PsfKernel(int image_size, ComplexImage grid) : image_size_(image_size), grid_(std::move(grid))
{
  if (grid_.width() != 2 * image_size || grid_.height() != 2 * image_size) {
    throw InvalidArgument("PsfKernel: grid must be twice the image size");
  }
}

PsfKernel build_psf(RadialTrajectory const &traj, KbTable const &tbl, int image_size)
{
  int const big = 2 * image_size;
  KbTable const big_tbl(big, tbl.kernel_width(), tbl.beta(), tbl.oversampling(), tbl.resolution());
  SampleVector const ones(traj.samples.size(), cdouble(1.0, 0.0));
  // q on centered offsets [-n, n), moved to FFT order for the circular convolution.
  auto q = fft::ifftshift(nufft_adjoint(ones, traj, big_tbl));
  fft::forward(q.data(), big, big);
  double const inv = 1.0 / (static_cast<double>(big) * big);
  // q is Hermitian, so its transform is real up to rounding.
  for (auto &v : q.data()) { v = cdouble(v.real() * inv, 0.0); }
  return PsfKernel(image_size, std::move(q));
}

ComplexImage normal_apply(ComplexImage const &img, PsfKernel const &psf)
{
  int const n = psf.image_size();
  if (img.width() != n || img.height() != n) { throw InvalidArgument("normal_apply: image does not match PSF"); }
  int const big = 2 * n;
  std::vector<cdouble> g(static_cast<std::size_t>(big) * big);
  for (int y = 0; y < n; ++y) {
    int const gy = wrap(y - n / 2, big);
    for (int x = 0; x < n; ++x) { g[static_cast<std::size_t>(gy) * big + wrap(x - n / 2, big)] = img(x, y); }
  }
  fft::forward(g, big, big);
  auto const &p = psf.grid();
  for (std::size_t i = 0; i < g.size(); ++i) { g[i] *= p[i]; }
  fft::backward(g, big, big);
  ComplexImage out(n, n);
  for (int y = 0; y < n; ++y) {
    int const gy = wrap(y - n / 2, big);
    for (int x = 0; x < n; ++x) { out(x, y) = g[static_cast<std::size_t>(gy) * big + wrap(x - n / 2, big)]; }
  }
  return out;
}

} // namespace rtmri
