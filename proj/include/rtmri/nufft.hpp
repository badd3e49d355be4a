#pragma once

#include "rtmri/image.hpp"

#include <vector>

namespace rtmri {

/// k-space position in cycles per pixel; each axis lies in [-0.5, 0.5).
struct KPoint {
  double kx = 0.0;
  double ky = 0.0;
  bool operator==(KPoint const &) const = default;
};

struct RadialTrajectory {
  std::vector<KPoint> samples;   // spoke-major: samples[spoke * samples_per_spoke + i]
  int spokes = 0;
  int samples_per_spoke = 0;
  std::vector<double> spoke_times; // seconds

  std::size_t size() const { return samples.size(); }
  void validate() const;
};

/// Kaiser-Bessel gridding kernel with a precomputed lookup table.
///
/// The kernel psi(r) = I0(beta sqrt(1 - (2r/L)^2)) / I0(beta) is supported on
/// |r| < L/2 oversampled-grid cells. Deapodization divides each image pixel by
/// the kernel's analytic Fourier transform at x / grid_size.
class KbTable {
public:
  KbTable(int image_size, int kernel_width, double beta, double oversampling, int resolution);

  int image_size() const { return image_size_; }
  int grid_size() const { return grid_size_; }
  int kernel_width() const { return kernel_width_; }
  double beta() const { return beta_; }
  double oversampling() const { return oversampling_; }
  int resolution() const { return resolution_; }
  std::vector<double> const &table() const { return table_; }

  /// Table lookup with linear interpolation; 0 for |r| >= L/2.
  double kernel(double r) const;
  /// Closed-form kernel value (no table).
  double kernel_exact(double r) const;
  /// Analytic transform of the kernel at normalized image position xi (cycles^-1 of the grid).
  double kernel_transform(double xi) const;

  /// Multiplier 1 / transform per centered pixel index along one axis.
  std::vector<double> const &deapodization_1d() const { return deapod_; }
  RealImage deapodization() const;

private:
  int image_size_;
  int kernel_width_;
  double beta_;
  double oversampling_;
  int resolution_;
  int grid_size_;
  std::vector<double> table_;
  std::vector<double> deapod_;
};

struct KbParams {
  int kernel_width = 6;
  double beta = 13.8551;
  double oversampling = 1.5;
  int resolution = 1000;
};

KbTable build_kb_table(int image_size, KbParams const &params = {});

/// (F img)(k_j) for every trajectory sample, by deapodization, zero-padded FFT
/// on the oversampled grid and Kaiser-Bessel interpolation.
SampleVector nufft_forward(ComplexImage const &img, RadialTrajectory const &traj, KbTable const &tbl);
/// Exact adjoint of nufft_forward: sum_j y_j e^{2 pi i <k_j, x>} up to gridding error.
ComplexImage nufft_adjoint(std::span<cdouble const> samples, RadialTrajectory const &traj, KbTable const &tbl);

/// Frequency-domain multiplier on the 2x grid implementing f -> q * f with
/// q(x) = sum_j e^{2 pi i <k_j, x>}. Stored normalized by (2n)^2 and in FFT
/// order (index 0 = DC), so a sample exactly on the 2x grid contributes 1 there.
class PsfKernel {
public:
  PsfKernel() = default;
  PsfKernel(int image_size, ComplexImage grid);

  int image_size() const { return image_size_; }
  ComplexImage const &grid() const { return grid_; }

private:
  int image_size_ = 0;
  ComplexImage grid_;
};

PsfKernel build_psf(RadialTrajectory const &traj, KbTable const &tbl, int image_size);

/// F* S* S F img through the PSF: pad to 2n, FFT, multiply, inverse FFT, crop.
ComplexImage normal_apply(ComplexImage const &img, PsfKernel const &psf);

} // namespace rtmri
