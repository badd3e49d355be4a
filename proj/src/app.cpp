#include "rtmri/app.hpp"

#include "rtmri/pca.hpp"

#include <sstream>

namespace rtmri {

namespace {

std::string format_number(double v)
{
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

} // namespace

Dataset simulate_dataset(RunConfig const &cfg)
{
  cfg.validate();
  auto const &acq = cfg.acquisition;
  auto sim = simulate_series(cfg.phantom, cfg.coils, acq);
  Dataset out;
  out.manifest = describe(sim.frames, acq.base_resolution, acq.repetition_time, acq.interleaves);
  out.manifest.physics = {{"echo_time", "1.48 ms"},
                          {"flip_angle", "8 deg"},
                          {"fov", format_number(cfg.phantom.fov) + " x " + format_number(cfg.phantom.fov) + " mm"},
                          {"section_thickness", "5.0 mm"},
                          {"noise_sigma", format_number(sim.noise_sigma)},
                          {"seed", std::to_string(acq.seed)}};
  out.frames = std::move(sim.frames);
  out.truth = magnitudes(sim.truth);
  return out;
}

ReconstructionOutput reconstruct_dataset(Dataset const &dataset, RunConfig const &cfg)
{
  cfg.validate();
  if (dataset.manifest.normalized) {
    throw InvalidArgument("reconstruct: dataset is already normalized; normalization runs once per reconstruction");
  }
  if (dataset.frames.empty()) { throw InvalidArgument("reconstruct: dataset has no frames"); }
  int const n = dataset.manifest.base_resolution;
  int const coils = dataset.frames.front().coil_count();

  ReconstructionOutput out;
  auto normalized = normalize_dataset(dataset.frames, 100.0);
  out.normalization_scale = normalized.scale;
  out.virtual_channels = cfg.effective_virtual_channels(coils);
  if (out.virtual_channels > coils) {
    throw ConfigError("virtual channels (" + std::to_string(out.virtual_channels) + ") exceed coils (" +
                      std::to_string(coils) + ")");
  }
  std::vector<MultiCoilFrame> frames;
  if (out.virtual_channels < coils) {
    auto compressed = pca_compress(normalized.frames, out.virtual_channels);
    out.retained_energy = compressed.retained_fraction;
    frames = std::move(compressed.frames);
  } else {
    frames = std::move(normalized.frames);
  }

  SeriesResult result;
  switch (cfg.method) {
  case Method::nlinv: result = run_nlinv_series(frames, n, cfg.pipeline); break;
  case Method::nlinv_med:
    result = run_nlinv_series(frames, n, cfg.pipeline);
    result.images = temporal_median(result.images, cfg.median_width);
    break;
  case Method::ame: result = run_pipeline(frames, n, cfg.pipeline); break;
  }
  out.images = std::move(result.images);
  out.failures = std::move(result.failures);
  out.timing = std::move(result.timing);
  return out;
}

} // namespace rtmri
