#include "rtmri/io.hpp"

#include <json.hpp>
#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace rtmri {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void put_u32(std::string &out, std::uint32_t v)
{
  for (int i = 0; i < 4; ++i) { out.push_back(static_cast<char>((v >> (8 * i)) & 0xff)); }
}

void put_u64(std::string &out, std::uint64_t v)
{
  for (int i = 0; i < 8; ++i) { out.push_back(static_cast<char>((v >> (8 * i)) & 0xff)); }
}

void put_f32(std::string &out, double v) { put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
void put_f64(std::string &out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_uint(std::string const &in, std::size_t pos, int bytes)
{
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) { v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i); }
  return v;
}

double get_f32(std::string const &in, std::size_t pos)
{
  return std::bit_cast<float>(static_cast<std::uint32_t>(get_uint(in, pos, 4)));
}

double get_f64(std::string const &in, std::size_t pos) { return std::bit_cast<double>(get_uint(in, pos, 8)); }

std::string frame_file(int t, int l) { return "frame_" + std::to_string(t) + "_coil_" + std::to_string(l) + ".cfl"; }
std::string traj_file(int t) { return "traj_" + std::to_string(t) + ".bin"; }
std::string image_stem(int t) { return "image_" + std::to_string(t); }

void expect_size(std::string const &bytes, std::size_t expected, fs::path const &path)
{
  if (bytes.size() != expected) {
    throw IoError(path.string() + ": expected " + std::to_string(expected) + " bytes, found " +
                  std::to_string(bytes.size()));
  }
}

json parse_json(fs::path const &path)
{
  try {
    return json::parse(read_file(path));
  } catch (json::exception const &e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

/// Build a directory next to `dir`, then move it into place.
template <typename Fill>
void write_directory_atomic(fs::path const &dir, char const *marker, Fill fill)
{
  std::error_code ec;
  if (fs::exists(dir) && !fs::is_empty(dir) && !fs::exists(dir / marker)) {
    throw IoError(dir.string() + ": exists and is not a " + marker + " directory");
  }
  fs::path const tmp = dir.string() + ".partial";
  fs::remove_all(tmp, ec);
  if (!fs::create_directories(tmp, ec) || ec) { throw IoError(tmp.string() + ": cannot create directory"); }
  try {
    fill(tmp);
  } catch (...) {
    fs::remove_all(tmp, ec);
    throw;
  }
  fs::remove_all(dir, ec);
  fs::rename(tmp, dir, ec);
  if (ec) { throw IoError(dir.string() + ": " + ec.message()); }
}

void write_plain(fs::path const &path, std::string const &bytes)
{
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) { throw IoError(path.string() + ": write failed"); }
}

} // namespace

void write_file_atomic(fs::path const &path, std::string const &bytes)
{
  fs::path const tmp = path.string() + ".tmp";
  write_plain(tmp, bytes);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError(path.string() + ": rename failed");
  }
}

std::string read_file(fs::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) { throw IoError(path.string() + ": cannot open"); }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void DatasetManifest::validate() const
{
  if (version != 1) { throw IoError("manifest: unsupported version " + std::to_string(version)); }
  if (frames < 1 || coils < 1 || spokes_per_frame < 1 || samples_per_spoke < 1 || base_resolution < 2) {
    throw IoError("manifest: counts must be positive");
  }
  if (!(repetition_time_s > 0.0) || interleaves < 1) { throw IoError("manifest: invalid timing"); }
}

DatasetManifest describe(std::vector<MultiCoilFrame> const &frames, int base_resolution, double repetition_time_s,
                         int interleaves)
{
  if (frames.empty()) { throw InvalidArgument("describe: no frames"); }
  DatasetManifest m;
  m.frames = static_cast<int>(frames.size());
  m.coils = frames.front().coil_count();
  m.spokes_per_frame = frames.front().trajectory.spokes;
  m.samples_per_spoke = frames.front().trajectory.samples_per_spoke;
  m.base_resolution = base_resolution;
  m.repetition_time_s = repetition_time_s;
  m.interleaves = interleaves;
  return m;
}

void write_dataset(fs::path const &dir, Dataset const &dataset)
{
  auto const &m = dataset.manifest;
  m.validate();
  if (dataset.frames.size() != static_cast<std::size_t>(m.frames)) { throw IoError("dataset: frame count mismatch"); }
  std::size_t const per_frame = static_cast<std::size_t>(m.spokes_per_frame) * m.samples_per_spoke;
  for (auto const &f : dataset.frames) {
    f.validate();
    if (f.coil_count() != m.coils || f.trajectory.size() != per_frame || f.trajectory.spokes != m.spokes_per_frame) {
      throw IoError("dataset: frame " + std::to_string(f.frame_index) + " does not match the manifest");
    }
  }

  write_directory_atomic(dir, "manifest.json", [&](fs::path const &tmp) {
    json j = {{"version", m.version},
              {"frames", m.frames},
              {"coils", m.coils},
              {"spokes_per_frame", m.spokes_per_frame},
              {"samples_per_spoke", m.samples_per_spoke},
              {"base_resolution", m.base_resolution},
              {"repetition_time_s", m.repetition_time_s},
              {"interleaves", m.interleaves},
              {"normalized", m.normalized},
              {"physics", m.physics}};
    write_plain(tmp / "manifest.json", j.dump(2) + "\n");

    std::string times;
    for (int t = 0; t < m.frames; ++t) {
      auto const &f = dataset.frames[t];
      for (int l = 0; l < m.coils; ++l) {
        std::string bytes;
        bytes.reserve(per_frame * 8);
        for (auto const &v : f.coils[l]) {
          put_f32(bytes, v.real());
          put_f32(bytes, v.imag());
        }
        write_plain(tmp / frame_file(t, l), bytes);
      }
      std::string traj;
      traj.reserve(per_frame * 8);
      for (auto const &k : f.trajectory.samples) {
        put_f32(traj, k.kx);
        put_f32(traj, k.ky);
      }
      write_plain(tmp / traj_file(t), traj);
      for (double s : f.trajectory.spoke_times) { put_f64(times, s); }
    }
    write_plain(tmp / "spoke_times.bin", times);
    if (!dataset.truth.empty()) { write_series(tmp / "truth", dataset.truth, "truth"); }
  });
}

Dataset read_dataset(fs::path const &dir)
{
  auto const j = parse_json(dir / "manifest.json");
  Dataset out;
  auto &m = out.manifest;
  try {
    m.version = j.at("version").get<int>();
    m.frames = j.at("frames").get<int>();
    m.coils = j.at("coils").get<int>();
    m.spokes_per_frame = j.at("spokes_per_frame").get<int>();
    m.samples_per_spoke = j.at("samples_per_spoke").get<int>();
    m.base_resolution = j.at("base_resolution").get<int>();
    m.repetition_time_s = j.at("repetition_time_s").get<double>();
    m.interleaves = j.at("interleaves").get<int>();
    m.normalized = j.value("normalized", false);
    m.physics = j.value("physics", std::map<std::string, std::string>{});
  } catch (json::exception const &e) {
    throw IoError((dir / "manifest.json").string() + ": " + e.what());
  }
  m.validate();

  std::size_t const per_frame = static_cast<std::size_t>(m.spokes_per_frame) * m.samples_per_spoke;
  auto const times = read_file(dir / "spoke_times.bin");
  expect_size(times, static_cast<std::size_t>(m.frames) * m.spokes_per_frame * 8, dir / "spoke_times.bin");

  for (int t = 0; t < m.frames; ++t) {
    MultiCoilFrame f;
    f.frame_index = t;
    f.trajectory.spokes = m.spokes_per_frame;
    f.trajectory.samples_per_spoke = m.samples_per_spoke;
    auto const traj = read_file(dir / traj_file(t));
    expect_size(traj, per_frame * 8, dir / traj_file(t));
    f.trajectory.samples.reserve(per_frame);
    for (std::size_t i = 0; i < per_frame; ++i) {
      f.trajectory.samples.push_back({get_f32(traj, 8 * i), get_f32(traj, 8 * i + 4)});
    }
    for (int j = 0; j < m.spokes_per_frame; ++j) {
      f.trajectory.spoke_times.push_back(get_f64(times, 8 * (static_cast<std::size_t>(t) * m.spokes_per_frame + j)));
    }
    for (int l = 0; l < m.coils; ++l) {
      auto const bytes = read_file(dir / frame_file(t, l));
      expect_size(bytes, per_frame * 8, dir / frame_file(t, l));
      SampleVector s(per_frame);
      for (std::size_t i = 0; i < per_frame; ++i) { s[i] = cdouble(get_f32(bytes, 8 * i), get_f32(bytes, 8 * i + 4)); }
      f.coils.push_back(std::move(s));
    }
    try {
      f.validate();
    } catch (InvalidArgument const &e) {
      throw IoError(dir.string() + ": " + e.what());
    }
    out.frames.push_back(std::move(f));
  }
  if (fs::exists(dir / "truth" / "series.json")) { out.truth = read_series(dir / "truth"); }
  return out;
}

std::vector<RealImage> magnitudes(std::vector<ComplexImage> const &series)
{
  std::vector<RealImage> out;
  out.reserve(series.size());
  for (auto const &img : series) { out.push_back(magnitude(img)); }
  return out;
}

std::string encode_png(RealImage const &img, double scale)
{
  if (img.empty()) { throw InvalidArgument("encode_png: empty image"); }
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("encode_png: libpng initialisation failed");
  }
  std::string out;
  std::vector<png_byte> row(static_cast<std::size_t>(img.width()));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("encode_png: libpng error");
  }
  png_set_write_fn(
    png, &out,
    [](png_structp p, png_bytep data, png_size_t len) {
      static_cast<std::string *>(png_get_io_ptr(p))->append(reinterpret_cast<char const *>(data), len);
    },
    nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  double const inv = scale > 0.0 ? 1.0 / scale : 0.0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      row[x] = static_cast<png_byte>(std::lround(std::clamp(img(x, y) * inv, 0.0, 1.0) * 255.0));
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_series(fs::path const &dir, std::vector<RealImage> const &images, std::string const &label)
{
  if (images.empty()) { throw InvalidArgument("write_series: empty series"); }
  double peak = 0.0;
  for (auto const &img : images) {
    require_same_shape(images.front(), img, "write_series");
    for (double v : img.data()) { peak = std::max(peak, v); }
  }
  write_directory_atomic(dir, "series.json", [&](fs::path const &tmp) {
    json j = {{"width", images.front().width()},
              {"height", images.front().height()},
              {"frames", images.size()},
              {"label", label}};
    write_plain(tmp / "series.json", j.dump(2) + "\n");
    for (std::size_t t = 0; t < images.size(); ++t) {
      std::string raw;
      raw.reserve(images[t].size() * 4);
      for (double v : images[t].data()) { put_f32(raw, v); }
      write_plain(tmp / (image_stem(static_cast<int>(t)) + ".raw"), raw);
      write_plain(tmp / (image_stem(static_cast<int>(t)) + ".png"), encode_png(images[t], peak));
    }
  });
}

SeriesInfo read_series_info(fs::path const &dir)
{
  auto const j = parse_json(dir / "series.json");
  SeriesInfo info;
  try {
    info.width = j.at("width").get<int>();
    info.height = j.at("height").get<int>();
    info.frames = j.at("frames").get<int>();
    info.label = j.value("label", std::string());
  } catch (json::exception const &e) {
    throw IoError((dir / "series.json").string() + ": " + e.what());
  }
  if (info.width < 1 || info.height < 1 || info.frames < 1) { throw IoError(dir.string() + ": invalid series header"); }
  return info;
}

std::vector<RealImage> read_series(fs::path const &dir)
{
  auto const info = read_series_info(dir);
  std::size_t const count = static_cast<std::size_t>(info.width) * info.height;
  std::vector<RealImage> out;
  for (int t = 0; t < info.frames; ++t) {
    auto const path = dir / (image_stem(t) + ".raw");
    auto const bytes = read_file(path);
    expect_size(bytes, count * 4, path);
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) { v[i] = get_f32(bytes, 4 * i); }
    out.emplace_back(info.width, info.height, std::move(v));
  }
  return out;
}

Image<unsigned char> read_mask(fs::path const &path, int width, int height)
{
  auto const bytes = read_file(path);
  expect_size(bytes, static_cast<std::size_t>(width) * height, path);
  std::vector<unsigned char> v(bytes.begin(), bytes.end());
  for (auto &b : v) { b = b != 0; }
  return Image<unsigned char>(width, height, std::move(v));
}

} // namespace rtmri
