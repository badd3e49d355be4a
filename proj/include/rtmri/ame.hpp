#pragma once

#include "rtmri/flow.hpp"
#include "rtmri/nlinv.hpp"

#include <memory>

namespace rtmri {

/// One windowed reconstruction: density of frame t, coils of every t+s.
struct AmeProblem {
  int center_index = 0;
  std::vector<int> offsets;                 // the (clipped) window K
  std::vector<MultiCoilFrame> frames;       // frame t+s for each offset, same order
  std::vector<MotionField> flows;           // phi_{t,s}; zero field at s = 0
  Unknowns init;                            // anchor and starting point
  IrgnmConfig irgnm;
  SobolevConfig sobolev;
  KbParams kb;
  /// Optional precomputed PSFs (same order as frames); built when empty.
  std::vector<std::shared_ptr<PsfKernel const>> psfs;

  void validate() const;
  int image_size() const { return init.width(); }
};

/// Per-(s, l) samples, index = offset_index * coil_count + l.
using WindowSamples = std::vector<SampleVector>;

class AmeOperator;
struct ReconResult;
namespace ame {
ReconResult reconstruct_frame(AmeProblem const &problem);
}

/// Aggregated operator family F_{t+s} o Phi_{t,s} o M for a fixed problem.
class AmeOperator {
public:
  explicit AmeOperator(AmeProblem const &problem);
  ~AmeOperator();
  AmeOperator(AmeOperator &&) noexcept;

  WindowSamples forward(Unknowns const &x) const;
  WindowSamples jacobian(Unknowns const &x, Unknowns const &h) const;
  Unknowns jacobian_adjoint(Unknowns const &x, WindowSamples const &r) const;
  WindowSamples data() const;

private:
  friend ReconResult ame::reconstruct_frame(AmeProblem const &);
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

namespace ame {

WindowSamples jacobian_apply(Unknowns const &x, Unknowns const &h, AmeProblem const &problem);
Unknowns jacobian_adjoint_apply(Unknowns const &x, WindowSamples const &r, AmeProblem const &problem);
ReconResult reconstruct_frame(AmeProblem const &problem);

} // namespace ame

struct PipelineConfig {
  WindowSpec window;
  IrgnmConfig nlinv;   // precompute / baseline
  IrgnmConfig ame = {1.0, 1.0 / 3.0, 4, 200, 1e-2};
  SobolevConfig sobolev;
  FlowConfig flow;
  KbParams kb;
  int ame_passes = 1;
};

struct FrameTiming {
  int frame = 0;
  int waits_for_frame = 0;       // last frame whose data the output depends on
  double latency_seconds = 0.0;  // acquisition wait beyond the frame's own end
  double compute_seconds = 0.0;
};

struct SeriesResult {
  std::vector<ComplexImage> images;
  std::vector<double> residual_norms;
  std::vector<FrameTiming> timing;
  std::vector<std::string> failures; // "frame <t>: message"
  std::vector<ComplexImage> precompute; // NLINV images used for motion estimation
  std::vector<Unknowns> unknowns;
};

/// NLINV on every frame, warm-started from the previous frame.
SeriesResult run_nlinv_series(std::vector<MultiCoilFrame> const &frames, int image_size, PipelineConfig const &cfg);

/// NLINV precompute -> pairwise motion estimation -> aggregated reconstruction.
SeriesResult run_pipeline(std::vector<MultiCoilFrame> const &frames, int image_size, PipelineConfig const &cfg);

/// Per-pixel temporal median of magnitudes keeping the center frame's phase.
std::vector<ComplexImage> temporal_median(std::vector<ComplexImage> const &series, int width = 5);

} // namespace rtmri
