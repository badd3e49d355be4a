#pragma once

#include "rtmri/frame.hpp"

#include <cstdint>
#include <optional>
#include <utility>

namespace rtmri {

struct Tube {
  double orbit_radius = 0.0;  // mm
  double tube_radius = 5.0;   // mm
  double amplitude = 1.0;
  double initial_angle = 0.0; // degrees
};

/// Rigid jump between two positions, switching every `interval` seconds.
struct ToggleMotion {
  double interval = 0.0; // seconds
  double dx = 0.0;       // mm
  double dy = 0.0;       // mm
};

struct PhantomSpec {
  double disc_radius = 90.0; // mm, signal-free container
  std::vector<Tube> tubes;
  double rotation_hz = 0.0;
  double fov = 256.0; // mm
  std::optional<ToggleMotion> toggle;

  void validate() const;
  /// Three tubes on the orbits of the rotating-tube experiment.
  static PhantomSpec rotating_tubes(double rotation_hz);
  /// Tube centers in mm at time `seconds`.
  std::vector<std::pair<double, double>> tube_centers(double seconds) const;
};

struct Coil {
  double cx = 0.0;     // normalized field-of-view coordinates, centered
  double cy = 0.0;
  double width = 0.5;  // normalized
  double phase_x = 0.0; // cycles per field of view
  double phase_y = 0.0;
};

struct CoilModel {
  std::vector<Coil> coils;

  int count() const { return static_cast<int>(coils.size()); }
  void validate() const;
  static CoilModel ring(int count = 8, double radius = 0.5, double width = 0.4, double phase = 0.5);
};

struct AcquisitionSpec {
  int base_resolution = 128;
  int spokes_per_frame = 9;
  int readout_oversampling = 2;
  double repetition_time = 2.28e-3; // seconds
  int interleaves = 5;
  int frames = 25;
  std::optional<double> noise_sigma; // absolute; default 1e-3 x DC magnitude
  std::uint64_t seed = 1;

  void validate() const;
  int samples_per_spoke() const { return readout_oversampling * base_resolution; }
  double frame_duration() const { return spokes_per_frame * repetition_time; }
};

RadialTrajectory make_trajectory(AcquisitionSpec const &acq, int frame_index);

/// Fourier transform of a uniform disc. Positions and radius share one length
/// unit and k is in cycles per that unit.
cdouble disc_kspace(double cx, double cy, double radius, double amplitude, KPoint const &k);

cdouble coil_value(Coil const &coil, double x, double y);
std::vector<ComplexImage> synth_coils(CoilModel const &model, int size);

/// Area-averaged raster of the tubes at time `seconds`.
ComplexImage rasterize(PhantomSpec const &phantom, int size, double seconds, int supersample = 8);

/// Largest noiseless DC magnitude over coils at time 0.
double dc_magnitude(PhantomSpec const &phantom, CoilModel const &coils, AcquisitionSpec const &acq);

struct SimulatedSeries {
  std::vector<MultiCoilFrame> frames;
  std::vector<ComplexImage> truth;
  double noise_sigma = 0.0;
};

SimulatedSeries simulate_series(PhantomSpec const &phantom, CoilModel const &coils, AcquisitionSpec const &acq);

} // namespace rtmri
