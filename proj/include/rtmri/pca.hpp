#pragma once

#include "rtmri/frame.hpp"

namespace rtmri {

struct CompressedSeries {
  std::vector<MultiCoilFrame> frames;
  std::vector<double> energies;   // squared singular value per virtual channel, nonincreasing
  double total_energy = 0.0;      // squared norm of the input
  double retained_fraction = 0.0; // sum(energies) / total_energy
};

/// Project every frame onto the top `virtual_channels` right singular vectors of
/// the (all samples x coils) matrix.
CompressedSeries pca_compress(std::vector<MultiCoilFrame> const &frames, int virtual_channels = 10);

} // namespace rtmri
