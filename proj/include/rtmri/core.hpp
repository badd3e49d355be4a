#pragma once

#include "rtmri/image.hpp"

#include <vector>

namespace rtmri {

/// Parameters of the coil smoothness weighting a^{-1} (1 + b |k|^2)^{-m/2}.
///
/// |k| is measured in normalized frequency units (cycles per pixel, DC at the
/// grid center, each axis spanning [-0.5, 0.5)), so the weighting does not
/// depend on the grid size except through `a`.
struct SobolevConfig {
  double a = 10.0;
  double b = 220.0;
  double m = 32.0;

  void validate() const;
};

/// Precomputed weighting W = F^{-1} diag(w) and its exact adjoint.
///
/// Both act on centered grids: the input of apply() is a frequency-domain
/// array with DC at (width/2, height/2); its output is an image.
class SobolevWeighting {
public:
  SobolevWeighting(int width, int height, SobolevConfig const &cfg);

  ComplexImage apply(ComplexImage const &khat) const;
  ComplexImage adjoint(ComplexImage const &img) const;

  RealImage const &weights() const { return weights_; }
  SobolevConfig const &config() const { return cfg_; }
  int width() const { return weights_.width(); }
  int height() const { return weights_.height(); }

private:
  SobolevConfig cfg_;
  RealImage weights_;
};

/// a^{-1}(1 + b|k|^2)^{-m/2} sampled on a centered width x height frequency grid.
RealImage sobolev_weights(int width, int height, SobolevConfig const &cfg);

/// W khat: inverse Fourier transform of the weighted frequency array.
ComplexImage sobolev_weight_apply(ComplexImage const &khat, SobolevConfig const &cfg);
/// W* img: forward Fourier transform, the same real weighting, and the 1/N
/// factor that makes it the exact adjoint of sobolev_weight_apply.
ComplexImage sobolev_weight_adjoint(ComplexImage const &img, SobolevConfig const &cfg);

/// Temporal window offsets (the set K); sorted, unique, always contains 0.
class WindowSpec {
public:
  WindowSpec() : offsets_{-2, -1, 0, 1, 2} {}
  explicit WindowSpec(std::vector<int> offsets);

  std::vector<int> const &offsets() const { return offsets_; }
  std::size_t size() const { return offsets_.size(); }

  /// Offsets s with 0 <= t + s < frame_count.
  WindowSpec clipped(int t, int frame_count) const;

  static WindowSpec parse(std::string const &text);

private:
  std::vector<int> offsets_;
};

/// Stacked unknowns (density, coil maps per window offset and coil).
///
/// Coil maps are kept in preconditioned coordinates (the argument of W).
class Unknowns {
public:
  Unknowns() = default;
  Unknowns(ComplexImage density, std::vector<int> offsets, int coil_count, std::vector<ComplexImage> coils);

  static Unknowns zeros(int width, int height, std::vector<int> offsets, int coil_count);

  ComplexImage &density() { return density_; }
  ComplexImage const &density() const { return density_; }

  std::vector<int> const &offsets() const { return offsets_; }
  int coil_count() const { return coil_count_; }
  int width() const { return density_.width(); }
  int height() const { return density_.height(); }

  /// Position of offset s in offsets(); throws if absent.
  std::size_t offset_index(int s) const;

  ComplexImage &coil(std::size_t offset_index, int l) { return coils_[offset_index * coil_count_ + l]; }
  ComplexImage const &coil(std::size_t offset_index, int l) const { return coils_[offset_index * coil_count_ + l]; }
  ComplexImage &coil_at(int s, int l) { return coil(offset_index(s), l); }
  ComplexImage const &coil_at(int s, int l) const { return coil(offset_index(s), l); }

  std::vector<ComplexImage> &coils() { return coils_; }
  std::vector<ComplexImage> const &coils() const { return coils_; }

  bool same_shape(Unknowns const &o) const;
  Unknowns zeros_like() const;
  std::size_t element_count() const;

  Unknowns &operator+=(Unknowns const &o);
  Unknowns &operator-=(Unknowns const &o);
  Unknowns &operator*=(cdouble s);
  /// this += s * x
  void axpy(cdouble s, Unknowns const &x);
  bool all_finite() const;

private:
  ComplexImage density_;
  std::vector<int> offsets_;
  int coil_count_ = 0;
  std::vector<ComplexImage> coils_;
};

Unknowns operator+(Unknowns a, Unknowns const &b);
Unknowns operator-(Unknowns a, Unknowns const &b);
Unknowns operator*(cdouble s, Unknowns a);

/// sum over all components of conj(x) * y.
cdouble inner_product(Unknowns const &x, Unknowns const &y);
double norm(Unknowns const &x);

} // namespace rtmri
