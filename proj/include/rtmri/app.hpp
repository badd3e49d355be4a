#pragma once

#include "rtmri/config.hpp"
#include "rtmri/io.hpp"

namespace rtmri {

/// Simulated dataset with truth magnitudes and acquisition metadata.
Dataset simulate_dataset(RunConfig const &cfg);

struct ReconstructionOutput {
  std::vector<ComplexImage> images;
  std::vector<std::string> failures;
  std::vector<FrameTiming> timing;
  int virtual_channels = 0;
  double retained_energy = 1.0;
  double normalization_scale = 1.0;
};

/// normalize_dataset (target 100) -> pca_compress when fewer virtual channels
/// than coils are requested -> the configured method.
ReconstructionOutput reconstruct_dataset(Dataset const &dataset, RunConfig const &cfg);

} // namespace rtmri
