#include "rtmri/pca.hpp"

#include <Eigen/SVD>

namespace rtmri {

CompressedSeries pca_compress(std::vector<MultiCoilFrame> const &frames, int virtual_channels)
{
  if (frames.empty()) { throw InvalidArgument("pca_compress: no frames"); }
  int const coils = frames.front().coil_count();
  if (virtual_channels < 1 || virtual_channels > coils) {
    throw InvalidArgument("pca_compress: virtual channel count must be in [1, coils]");
  }
  Eigen::Index rows = 0;
  for (auto const &f : frames) {
    f.validate();
    if (f.coil_count() != coils) { throw InvalidArgument("pca_compress: coil count varies"); }
    rows += static_cast<Eigen::Index>(f.trajectory.size());
  }

  Eigen::MatrixXcd stacked(rows, coils);
  Eigen::Index row = 0;
  for (auto const &f : frames) {
    for (std::size_t i = 0; i < f.trajectory.size(); ++i, ++row) {
      for (int l = 0; l < coils; ++l) { stacked(row, l) = f.coils[l][i]; }
    }
  }

  Eigen::BDCSVD<Eigen::MatrixXcd> svd(stacked, Eigen::ComputeThinV);
  Eigen::MatrixXcd const basis = svd.matrixV().leftCols(virtual_channels);

  CompressedSeries out;
  out.total_energy = stacked.squaredNorm();
  double kept = 0.0;
  for (int v = 0; v < virtual_channels; ++v) {
    double const s = svd.singularValues()(v);
    out.energies.push_back(s * s);
    kept += s * s;
  }
  out.retained_fraction = out.total_energy > 0.0 ? kept / out.total_energy : 1.0;

  for (auto const &f : frames) {
    MultiCoilFrame g;
    g.frame_index = f.frame_index;
    g.trajectory = f.trajectory;
    g.coils.assign(virtual_channels, SampleVector(f.trajectory.size()));
    for (std::size_t i = 0; i < f.trajectory.size(); ++i) {
      for (int v = 0; v < virtual_channels; ++v) {
        cdouble acc = 0.0;
        for (int l = 0; l < coils; ++l) { acc += f.coils[l][i] * basis(l, v); }
        g.coils[v][i] = acc;
      }
    }
    out.frames.push_back(std::move(g));
  }
  return out;
}

} // namespace rtmri
