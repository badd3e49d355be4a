#pragma once

// Shared implementation of the windowed bilinear model
//   G_{s,l}(x) = S_s F( warp_s(rho) * W c_{s,l} )
// used by both the single-frame operators (one channel, identity warp) and
// the aggregated ones.

#include "rtmri/core.hpp"
#include "rtmri/flow.hpp"
#include "rtmri/nlinv.hpp"
#include "rtmri/nufft.hpp"

#include <optional>

namespace rtmri::detail {

struct Channel {
  RadialTrajectory const *trajectory = nullptr;
  PsfKernel const *psf = nullptr;
  std::optional<BicubicWarp> warp; // empty = identity
};

class BilinearModel {
public:
  BilinearModel(std::vector<Channel> channels, int coil_count, KbTable const &table, SobolevWeighting const &weighting);

  struct Linearization {
    ComplexImage density;
    std::vector<ComplexImage> warped_density;  // per channel
    std::vector<ComplexImage> weighted_coils;  // per (channel, coil)
  };

  Linearization linearize(Unknowns const &x) const;

  std::vector<SampleVector> forward(Linearization const &lin) const;
  std::vector<SampleVector> jacobian(Linearization const &lin, Unknowns const &h) const;
  Unknowns adjoint(Linearization const &lin, Unknowns const &shape, std::vector<SampleVector> const &r) const;
  /// G'* G' h through the PSF normal operators.
  Unknowns normal(Linearization const &lin, Unknowns const &h) const;

  std::size_t channel_count() const { return channels_.size(); }
  int coil_count() const { return coil_count_; }
  SobolevWeighting const &weighting() const { return *weighting_; }

private:
  void check(Unknowns const &x) const;
  ComplexImage warp(std::size_t c, ComplexImage const &img) const;
  ComplexImage warp_transpose(std::size_t c, ComplexImage const &img) const;

  std::vector<Channel> channels_;
  int coil_count_;
  KbTable const *table_;
  SobolevWeighting const *weighting_;
};

/// IRGNM with the Tikhonov anchor at `init`.
ReconResult run_irgnm(BilinearModel const &model, std::vector<SampleVector> const &data, Unknowns const &init,
                      IrgnmConfig const &cfg);

double residual_norm(std::vector<SampleVector> const &data, std::vector<SampleVector> const &pred);

} // namespace rtmri::detail
