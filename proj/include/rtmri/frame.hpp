#pragma once

#include "rtmri/nufft.hpp"

#include <vector>

namespace rtmri {

/// Samples y_{t,l} of one frame for all coils, sharing one trajectory.
struct MultiCoilFrame {
  int frame_index = 0;
  std::vector<SampleVector> coils;
  RadialTrajectory trajectory;

  int coil_count() const { return static_cast<int>(coils.size()); }
  void validate() const;
};

double dataset_norm(std::vector<MultiCoilFrame> const &frames);

struct NormalizedDataset {
  std::vector<MultiCoilFrame> frames;
  double scale = 1.0; // multiply the input by this to get `frames`
};

/// Scale every sample by one global factor so the dataset L2 norm equals `target`.
NormalizedDataset normalize_dataset(std::vector<MultiCoilFrame> frames, double target = 100.0);

} // namespace rtmri
