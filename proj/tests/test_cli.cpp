#include "doctest.h"
#include "support.hpp"

#include "rtmri/app.hpp"
#include "rtmri/metrics.hpp"
#include "rtmri/pca.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <filesystem>

#include <unistd.h>

using namespace rtmri;
using namespace testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir()
  {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() / ("rtmri_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

double frames_energy(std::vector<MultiCoilFrame> const &frames)
{
  double e = 0.0;
  for (auto const &f : frames) {
    for (auto const &c : f.coils) {
      for (auto v : c) { e += std::norm(v); }
    }
  }
  return e;
}

RunConfig small_config()
{
  RunConfig cfg;
  cfg.acquisition.base_resolution = 32;
  cfg.acquisition.frames = 3;
  cfg.coils = CoilModel::ring(4);
  return cfg;
}

} // namespace

TEST_CASE("pca: complete basis of orthogonal channels preserves energy")
{
  std::mt19937_64 rng(3);
  auto f = random_frame(rng, 16, 5, 3);
  // Gram-Schmidt across coils
  for (std::size_t a = 0; a < f.coils.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      cdouble const p = dot(f.coils[b], f.coils[a]) / dot(f.coils[b], f.coils[b]);
      for (std::size_t j = 0; j < f.coils[a].size(); ++j) { f.coils[a][j] -= p * f.coils[b][j]; }
    }
  }
  std::vector<MultiCoilFrame> const frames{f};
  auto const out = pca_compress(frames, 3);
  REQUIRE(out.frames.size() == 1);
  CHECK(out.frames[0].coil_count() == 3);
  double const e_in = frames_energy(frames);
  CHECK(std::abs(frames_energy(out.frames) - e_in) / e_in < 1e-10);
  CHECK(std::abs(out.retained_fraction - 1.0) < 1e-10);
  CHECK(std::abs(out.total_energy - e_in) / e_in < 1e-12);
}

TEST_CASE("pca: identical coils compress to one channel")
{
  std::mt19937_64 rng(4);
  auto f = random_frame(rng, 16, 5, 1);
  f.coils.push_back(f.coils[0]);
  auto const out = pca_compress({f}, 1);
  CHECK(std::abs(out.retained_fraction - 1.0) < 1e-12);
  CHECK(std::abs(frames_energy(out.frames) - frames_energy({f})) / frames_energy({f}) < 1e-12);
}

TEST_CASE("pca: retained energy matches a dense SVD of the phantom data")
{
  AcquisitionSpec acq;
  acq.base_resolution = 32;
  acq.frames = 3;
  auto const sim = simulate_series(PhantomSpec::rotating_tubes(1.0), CoilModel::ring(), acq);
  REQUIRE(sim.frames.front().coil_count() == 8);

  std::size_t rows = 0;
  for (auto const &f : sim.frames) { rows += f.trajectory.size(); }
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(rows), 8);
  Eigen::Index r = 0;
  for (auto const &f : sim.frames) {
    for (std::size_t j = 0; j < f.trajectory.size(); ++j, ++r) {
      for (int l = 0; l < 8; ++l) { m(r, l) = f.coils[l][j]; }
    }
  }
  // eigenvalues of the 8x8 Gram matrix are the squared singular values
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(m.adjoint() * m);
  auto const lambda = eig.eigenvalues(); // ascending
  double const total = lambda.sum();
  double const top4 = lambda(7) + lambda(6) + lambda(5) + lambda(4);

  auto const out = pca_compress(sim.frames, 4);
  CHECK(std::abs(out.retained_fraction - top4 / total) < 1e-8);
  CHECK(std::abs(frames_energy(out.frames) / frames_energy(sim.frames) - top4 / total) < 1e-8);
  REQUIRE(out.energies.size() == 4);
  for (std::size_t v = 1; v < out.energies.size(); ++v) { CHECK(out.energies[v] <= out.energies[v - 1]); }
  for (int v = 0; v < 4; ++v) { CHECK(std::abs(out.energies[v] - lambda(7 - v)) / total < 1e-10); }
}

TEST_CASE("pca: errors")
{
  std::mt19937_64 rng(5);
  auto const f = random_frame(rng, 16, 5, 2);
  CHECK_THROWS_AS(pca_compress({f}, 3), InvalidArgument);
  CHECK_THROWS_AS(pca_compress({f}, 0), InvalidArgument);
  auto g = random_frame(rng, 16, 5, 3, 1);
  CHECK_THROWS_AS(pca_compress({f, g}, 1), InvalidArgument);
}

TEST_CASE("io: dataset round trip is bitwise")
{
  TempDir tmp;
  auto const cfg = small_config();
  auto ds = simulate_dataset(cfg);
  // float32 payloads: compare against float-rounded input
  for (auto &f : ds.frames) {
    for (auto &c : f.coils) {
      for (auto &v : c) { v = cdouble(static_cast<float>(v.real()), static_cast<float>(v.imag())); }
    }
    for (auto &k : f.trajectory.samples) {
      k.kx = static_cast<float>(k.kx);
      k.ky = static_cast<float>(k.ky);
    }
  }
  auto const dir = tmp.path / "ds";
  write_dataset(dir, ds);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "frame_2_coil_3.cfl"));
  CHECK(fs::exists(dir / "spoke_times.bin"));
  CHECK_FALSE(fs::exists(tmp.path / "ds.partial"));

  auto const back = read_dataset(dir);
  CHECK(back.manifest.frames == 3);
  CHECK(back.manifest.coils == 4);
  CHECK(back.manifest.physics.at("flip_angle") == "8 deg");
  REQUIRE(back.frames.size() == ds.frames.size());
  for (std::size_t t = 0; t < ds.frames.size(); ++t) {
    auto const &a = ds.frames[t];
    auto const &b = back.frames[t];
    CHECK(b.frame_index == a.frame_index);
    REQUIRE(b.coil_count() == a.coil_count());
    for (int l = 0; l < a.coil_count(); ++l) { CHECK(a.coils[l] == b.coils[l]); }
    REQUIRE(b.trajectory.size() == a.trajectory.size());
    for (std::size_t j = 0; j < a.trajectory.size(); ++j) {
      CHECK(a.trajectory.samples[j].kx == b.trajectory.samples[j].kx);
      CHECK(a.trajectory.samples[j].ky == b.trajectory.samples[j].ky);
    }
    CHECK(a.trajectory.spoke_times == b.trajectory.spoke_times);
  }
  REQUIRE(back.truth.size() == ds.truth.size());

  auto const before = read_file(dir / "frame_0_coil_0.cfl");
  write_dataset(dir, back);
  CHECK(read_file(dir / "frame_0_coil_0.cfl") == before);
}

TEST_CASE("io: payload size mismatch and foreign directories")
{
  TempDir tmp;
  auto const ds = simulate_dataset(small_config());
  auto const dir = tmp.path / "ds";
  write_dataset(dir, ds);
  auto bytes = read_file(dir / "frame_1_coil_0.cfl");
  bytes.resize(bytes.size() - 8);
  write_file_atomic(dir / "frame_1_coil_0.cfl", bytes);
  CHECK_THROWS_AS(read_dataset(dir), IoError);

  auto const other = tmp.path / "other";
  fs::create_directories(other);
  write_file_atomic(other / "keep.txt", "x");
  CHECK_THROWS_AS(write_dataset(other, ds), IoError);
  CHECK(read_file(other / "keep.txt") == "x");

  CHECK_THROWS_AS(read_dataset(tmp.path / "missing"), IoError);
}

TEST_CASE("io: series round trip and png")
{
  TempDir tmp;
  std::mt19937_64 rng(9);
  std::vector<RealImage> images;
  for (int t = 0; t < 3; ++t) {
    auto img = random_real(rng, 12, 10);
    for (auto &v : img.data()) { v = static_cast<float>(std::abs(v)); }
    images.push_back(img);
  }
  write_series(tmp.path / "s", images, "test");
  auto const info = read_series_info(tmp.path / "s");
  CHECK(info.width == 12);
  CHECK(info.height == 10);
  CHECK(info.frames == 3);
  CHECK(info.label == "test");
  auto const back = read_series(tmp.path / "s");
  REQUIRE(back.size() == 3);
  for (int t = 0; t < 3; ++t) { CHECK(std::ranges::equal(back[t].data(), images[t].data())); }
  auto const png = read_file(tmp.path / "s" / "image_0.png");
  REQUIRE(png.size() > 8);
  CHECK(png.substr(1, 3) == "PNG");
}

TEST_CASE("reconstruct rejects a normalized dataset")
{
  auto cfg = small_config();
  auto ds = simulate_dataset(cfg);
  ds.manifest.normalized = true;
  CHECK_THROWS_AS(reconstruct_dataset(ds, cfg), InvalidArgument);
  ds.manifest.normalized = false;
  cfg.virtual_channels = 5;
  CHECK_THROWS_AS(reconstruct_dataset(ds, cfg), ConfigError);
}

TEST_CASE("config: defaults, overrides and unknown keys")
{
  auto const d = parse_config("{}");
  CHECK(d.method == Method::ame);
  CHECK(d.acquisition.spokes_per_frame == 9);
  CHECK(d.acquisition.base_resolution == 128);
  CHECK(d.pipeline.window.offsets() == std::vector<int>{-2, -1, 0, 1, 2});
  CHECK(d.effective_virtual_channels(8) == 8);
  CHECK(d.effective_virtual_channels(32) == 10);
  CHECK(d.median_width == 5);

  auto const c = parse_config(R"({"acquisition": {"frames": 7}, "flow": {"lambda": 0.05},
                                  "reconstruct": {"method": "nlinv-med", "virtual_channels": 4}})");
  CHECK(c.acquisition.frames == 7);
  CHECK(c.pipeline.flow.lambda == doctest::Approx(0.05));
  CHECK(c.method == Method::nlinv_med);
  CHECK(c.effective_virtual_channels(8) == 4);

  CHECK_THROWS_AS(parse_config(R"({"acquisition": {"frame": 7}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"bogus": {}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"acquisition": {"frames": 0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
  CHECK_THROWS_AS(parse_method("sense"), ConfigError);

  auto const again = parse_config(dump_config(c));
  CHECK(dump_config(again) == dump_config(c));
}

TEST_CASE("metrics: exact truth, constant series and series gauge")
{
  AcquisitionSpec acq;
  acq.base_resolution = 32;
  acq.frames = 3;
  auto const sim = simulate_series(PhantomSpec::rotating_tubes(1.0), CoilModel::ring(2), acq);
  MetricsOptions opts;
  opts.profile_column = 16;
  auto const exact = evaluate_series(sim.truth, sim.truth, opts);
  for (double e : exact.roi_rmse) { CHECK(e < 1e-12); }
  CHECK(exact.profile.width() == 3);
  CHECK(exact.profile.height() == 32);
  CHECK(exact.profile_scale == doctest::Approx(1.0));

  std::vector<ComplexImage> scaled;
  for (auto const &img : sim.truth) {
    auto s = img;
    for (auto &v : s.data()) { v *= cdouble(0.0, 3.0); }
    scaled.push_back(s);
  }
  CHECK(series_gauge_scale(scaled, sim.truth) == doctest::Approx(1.0 / 3.0));
  for (double e : evaluate_series(scaled, sim.truth, opts).roi_rmse) { CHECK(e < 1e-12); }

  std::vector<ComplexImage> constant(4, sim.truth.front());
  auto const flat = evaluate_series(constant, {}, opts);
  CHECK(flat.temporal_sharpness == 0.0);
  CHECK(flat.roi_rmse.empty());
  CHECK(flat.snr.size() == 4);

  std::vector<ComplexImage> wrong(2, sim.truth.front());
  CHECK_THROWS_AS(evaluate_series(wrong, sim.truth, opts), InvalidArgument);
}
