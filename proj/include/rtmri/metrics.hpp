#pragma once

#include "rtmri/image.hpp"

#include <optional>
#include <vector>

namespace rtmri {

using Mask = Image<unsigned char>;

/// Truth support (|truth| > threshold * max) dilated by `dilation` pixels (disc).
Mask object_roi(ComplexImage const &truth, int dilation = 2, double threshold = 1e-6);
/// Four patch x patch corner squares.
Mask background_roi(int width, int height, int patch = 8);

/// Least-squares scale s minimizing sum_mask (s |recon| - |truth|)^2.
double gauge_scale(ComplexImage const &recon, ComplexImage const &truth, Mask const &mask);
/// RMS of s |recon| - |truth| over the mask after the gauge fit.
double roi_rmse(ComplexImage const &recon, ComplexImage const &truth, Mask const &mask);
/// Mean |recon| over the object ROI over the std of |recon| over the background ROI.
double snr(ComplexImage const &recon, Mask const &object, Mask const &background);

/// |series[t]| at column x: result(t, y).
RealImage profile(std::vector<ComplexImage> const &series, int column);
/// Mean over rows of the largest absolute frame-to-frame difference.
double temporal_sharpness(RealImage const &profile);

/// One least-squares scale for a whole series against its truth.
double series_gauge_scale(std::vector<ComplexImage> const &recon, std::vector<ComplexImage> const &truth);

struct MetricsOptions {
  int profile_column = 0;
  std::optional<Mask> object_mask; // replaces the truth-derived object ROI
  int background_patch = 8;
};

struct MetricsReport {
  std::vector<double> roi_rmse; // empty without truth
  std::vector<double> snr;
  RealImage profile;            // (frame, row), after profile_scale
  double profile_scale = 1.0;   // series gauge with truth, 1 / series max without
  double temporal_sharpness = 0.0;
};

/// `truth` may be empty. Without truth or mask the object ROI is
/// |recon| >= 0.25 max of each frame.
MetricsReport evaluate_series(std::vector<ComplexImage> const &recon, std::vector<ComplexImage> const &truth,
                              MetricsOptions const &options);

} // namespace rtmri
