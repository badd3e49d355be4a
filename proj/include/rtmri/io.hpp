#pragma once

#include "rtmri/frame.hpp"
#include "rtmri/image.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtmri {

/// Raised for unreadable, unwritable or inconsistent files.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct DatasetManifest {
  int version = 1;
  int frames = 0;
  int coils = 0;
  int spokes_per_frame = 0;
  int samples_per_spoke = 0;
  int base_resolution = 0;
  double repetition_time_s = 0.0;
  int interleaves = 1;
  bool normalized = false;
  std::map<std::string, std::string> physics; // opaque acquisition metadata

  void validate() const;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<MultiCoilFrame> frames;
  std::vector<RealImage> truth; // optional, stored as a series under truth/
};

/// Manifest describing `frames`; physics metadata left empty.
DatasetManifest describe(std::vector<MultiCoilFrame> const &frames, int base_resolution, double repetition_time_s,
                         int interleaves);

/// Directory layout:
///   manifest.json
///   frame_<t>_coil_<l>.cfl   float32 LE (re, im) per sample, trajectory order
///   traj_<t>.bin             float32 LE (kx, ky) per sample
///   spoke_times.bin          float64 LE, frames x spokes
///   truth/                   magnitude series, when present
/// The directory is assembled under a temporary name and renamed into place.
void write_dataset(std::filesystem::path const &dir, Dataset const &dataset);
Dataset read_dataset(std::filesystem::path const &dir);

/// Magnitude image series:
///   series.json              width, height, frames, label
///   image_<t>.raw            float32 LE |x|, row-major
///   image_<t>.png            8-bit gray, scaled by the series maximum
struct SeriesInfo {
  int width = 0;
  int height = 0;
  int frames = 0;
  std::string label;
};

void write_series(std::filesystem::path const &dir, std::vector<RealImage> const &images, std::string const &label);
std::vector<RealImage> read_series(std::filesystem::path const &dir);
SeriesInfo read_series_info(std::filesystem::path const &dir);

std::vector<RealImage> magnitudes(std::vector<ComplexImage> const &series);

/// Write `bytes` to `path` through a sibling temporary file and rename.
void write_file_atomic(std::filesystem::path const &path, std::string const &bytes);
std::string read_file(std::filesystem::path const &path);

/// 8-bit grayscale PNG of img / scale, clamped to [0, 1].
std::string encode_png(RealImage const &img, double scale);

/// Mask stored as width*height bytes, nonzero = inside.
Image<unsigned char> read_mask(std::filesystem::path const &path, int width, int height);

} // namespace rtmri
