#include "rtmri/frame.hpp"

#include <cmath>

namespace rtmri {

void MultiCoilFrame::validate() const
{
  if (coils.empty()) { throw InvalidArgument("frame " + std::to_string(frame_index) + ": no coils"); }
  trajectory.validate();
  for (auto const &c : coils) {
    if (c.size() != trajectory.size()) {
      throw InvalidArgument("frame " + std::to_string(frame_index) + ": coil sample count does not match trajectory");
    }
  }
}

double dataset_norm(std::vector<MultiCoilFrame> const &frames)
{
  double s = 0.0;
  for (auto const &f : frames) {
    for (auto const &c : f.coils) {
      for (auto const &v : c) { s += std::norm(v); }
    }
  }
  return std::sqrt(s);
}

NormalizedDataset normalize_dataset(std::vector<MultiCoilFrame> frames, double target)
{
  if (!(target > 0.0)) { throw InvalidArgument("normalize_dataset: target must be positive"); }
  double const current = dataset_norm(frames);
  if (!(current > 0.0) || !std::isfinite(current)) {
    throw InvalidArgument("normalize_dataset: dataset has no nonzero finite samples");
  }
  double const scale = target / current;
  for (auto &f : frames) {
    for (auto &c : f.coils) {
      for (auto &v : c) { v *= scale; }
    }
  }
  return {std::move(frames), scale};
}

} // namespace rtmri
