#pragma once

#include "rtmri/image.hpp"

#include <array>
#include <vector>

namespace rtmri {

/// Per-pixel displacement in pixel units; warping reads img(x + u(x)).
struct MotionField {
  RealImage ux;
  RealImage uy;

  MotionField() = default;
  MotionField(RealImage ux_, RealImage uy_);
  static MotionField zeros(int width, int height);

  int width() const { return ux.width(); }
  int height() const { return ux.height(); }
  bool is_zero() const;
  double max_magnitude() const;
};

/// Keys cubic convolution kernel with a = -0.5.
double keys_cubic(double t);

/// Bicubic resampling x -> img(x + u(x)) for a fixed field, with the 4x4 taps
/// precomputed. Source coordinates are clamped to the grid.
class BicubicWarp {
public:
  explicit BicubicWarp(MotionField const &field);

  int width() const { return width_; }
  int height() const { return height_; }

  template <typename T>
  Image<T> apply(Image<T> const &img) const;
  /// Transpose of apply(): scatter each pixel to its source footprint.
  template <typename T>
  Image<T> adjoint(Image<T> const &img) const;

private:
  struct Taps {
    std::array<int, 4> ix;
    std::array<int, 4> iy;
    std::array<double, 4> wx;
    std::array<double, 4> wy;
  };
  int width_;
  int height_;
  std::vector<Taps> taps_;
};

ComplexImage warp_bicubic(ComplexImage const &img, MotionField const &field);
ComplexImage warp_adjoint(ComplexImage const &img, MotionField const &field);
RealImage warp_bicubic(RealImage const &img, MotionField const &field);

struct FlowConfig {
  double lambda = 0.02;  // TV weight on u
  double mu = 1.0;       // TV weight on v
  int primal_dual_iters = 50;
  double tau = 0.35355339059327373;   // 1/sqrt(8)
  double sigma = 0.35355339059327373; // 1/sqrt(8)
  int pyramid_levels = 3;
  int warps_per_level = 5;
  double u_step_scale = 3.0; // primal step for u is tau * scale, its dual step sigma / scale

  void validate() const;
};

/// Real images with values in [0, 1]; the warped image is `src`.
struct FlowProblem {
  RealImage src;
  RealImage dst;
  FlowConfig config;
};

struct FlowDiagnostics {
  MotionField field;
  RealImage artifact;                   // auxiliary v at the finest level
  std::vector<double> level_objective;  // full-resolution objective after each level
};

/// TV-L1 flow with artifact-absorbing auxiliary variable, solved coarse to fine.
MotionField estimate_motion(FlowProblem const &problem);
FlowDiagnostics estimate_motion_with_diagnostics(FlowProblem const &problem);

/// || src(x+u) - dst + v ||_1 + lambda TV(u) + mu TV(v) on the full grid.
double flow_objective(RealImage const &src, RealImage const &dst, MotionField const &u, RealImage const &v,
                      FlowConfig const &cfg);

/// Rescale a pair of images jointly to [0, 1] by their shared maximum.
std::pair<RealImage, RealImage> normalize_pair(RealImage const &a, RealImage const &b);

} // namespace rtmri
