#include "rtmri/phantom.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace rtmri {

namespace {
constexpr double pi = std::numbers::pi;
}

void PhantomSpec::validate() const
{
  if (!(fov > 0.0)) { throw InvalidArgument("PhantomSpec: fov must be positive"); }
  if (!(rotation_hz >= 0.0)) { throw InvalidArgument("PhantomSpec: rotation_hz must be >= 0"); }
  double shift = 0.0;
  if (toggle) {
    if (!(toggle->interval > 0.0)) { throw InvalidArgument("PhantomSpec: toggle interval must be positive"); }
    shift = std::hypot(toggle->dx, toggle->dy);
  }
  for (auto const &t : tubes) {
    if (!(t.tube_radius > 0.0) || t.orbit_radius < 0.0) { throw InvalidArgument("PhantomSpec: invalid tube"); }
    if (!(t.orbit_radius + t.tube_radius + shift < fov / 2)) {
      throw InvalidArgument("PhantomSpec: tube leaves the field of view");
    }
  }
}

PhantomSpec PhantomSpec::rotating_tubes(double rotation_hz)
{
  PhantomSpec p;
  p.rotation_hz = rotation_hz;
  p.tubes = {{25.0, 5.0, 1.0, 0.0}, {37.75, 5.0, 1.0, 120.0}, {55.0, 5.0, 1.0, 240.0}};
  return p;
}

std::vector<std::pair<double, double>> PhantomSpec::tube_centers(double seconds) const
{
  double const turn = 2.0 * pi * rotation_hz * seconds;
  double ox = 0.0;
  double oy = 0.0;
  if (toggle && static_cast<long long>(std::floor(seconds / toggle->interval + 1e-9)) % 2 != 0) {
    ox = toggle->dx;
    oy = toggle->dy;
  }
  std::vector<std::pair<double, double>> out;
  for (auto const &t : tubes) {
    double const a = t.initial_angle * pi / 180.0 + turn;
    out.emplace_back(t.orbit_radius * std::cos(a) + ox, t.orbit_radius * std::sin(a) + oy);
  }
  return out;
}

void CoilModel::validate() const
{
  if (coils.empty()) { throw InvalidArgument("CoilModel: at least one coil required"); }
  for (auto const &c : coils) {
    if (!(c.width > 0.0)) { throw InvalidArgument("CoilModel: widths must be positive"); }
  }
}

CoilModel CoilModel::ring(int count, double radius, double width, double phase)
{
  CoilModel m;
  for (int l = 0; l < count; ++l) {
    double const a = 2.0 * pi * l / count;
    m.coils.push_back({radius * std::cos(a), radius * std::sin(a), width, phase * std::cos(a), phase * std::sin(a)});
  }
  m.validate();
  return m;
}

void AcquisitionSpec::validate() const
{
  if (base_resolution < 2 || spokes_per_frame < 1 || readout_oversampling < 1) {
    throw InvalidArgument("AcquisitionSpec: invalid sampling dimensions");
  }
  if (interleaves < 1) { throw InvalidArgument("AcquisitionSpec: interleaves must be >= 1"); }
  if (frames < 1) { throw InvalidArgument("AcquisitionSpec: frames must be >= 1"); }
  if (!(repetition_time > 0.0)) { throw InvalidArgument("AcquisitionSpec: repetition time must be positive"); }
  if (noise_sigma && !(*noise_sigma >= 0.0)) { throw InvalidArgument("AcquisitionSpec: noise sigma must be >= 0"); }
}

RadialTrajectory make_trajectory(AcquisitionSpec const &acq, int frame_index)
{
  acq.validate();
  if (frame_index < 0) { throw InvalidArgument("make_trajectory: negative frame index"); }
  int const m = acq.spokes_per_frame;
  int const ns = acq.samples_per_spoke();
  double const step = 2.0 * pi / m;
  double const shift = (frame_index % acq.interleaves) * step / acq.interleaves;
  auto fold = [](double v) { return v >= 0.5 ? v - 1.0 : v; };

  RadialTrajectory traj;
  traj.spokes = m;
  traj.samples_per_spoke = ns;
  traj.samples.reserve(static_cast<std::size_t>(m) * ns);
  for (int j = 0; j < m; ++j) {
    double const theta = j * step + shift;
    double const c = std::cos(theta);
    double const s = std::sin(theta);
    for (int i = 0; i < ns; ++i) {
      double const r = -0.5 + static_cast<double>(i) / ns;
      traj.samples.push_back({fold(r * c), fold(r * s)});
    }
    traj.spoke_times.push_back((static_cast<double>(frame_index) * m + j) * acq.repetition_time);
  }
  return traj;
}

cdouble disc_kspace(double cx, double cy, double radius, double amplitude, KPoint const &k)
{
  if (!(radius > 0.0)) { throw InvalidArgument("disc_kspace: radius must be positive"); }
  double const kr = std::hypot(k.kx, k.ky);
  double const mag = kr * radius < 1e-12 ? amplitude * pi * radius * radius
                                         : amplitude * radius * std::cyl_bessel_j(1.0, 2.0 * pi * radius * kr) / kr;
  return mag * std::polar(1.0, -2.0 * pi * (k.kx * cx + k.ky * cy));
}

cdouble coil_value(Coil const &coil, double x, double y)
{
  double const dx = x - coil.cx;
  double const dy = y - coil.cy;
  double const g = std::exp(-(dx * dx + dy * dy) / (2.0 * coil.width * coil.width));
  return g * std::polar(1.0, 2.0 * pi * (coil.phase_x * x + coil.phase_y * y));
}

std::vector<ComplexImage> synth_coils(CoilModel const &model, int size)
{
  model.validate();
  std::vector<ComplexImage> out;
  for (auto const &c : model.coils) {
    ComplexImage img(size, size);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        img(x, y) = coil_value(c, static_cast<double>(x - size / 2) / size, static_cast<double>(y - size / 2) / size);
      }
    }
    out.push_back(std::move(img));
  }
  return out;
}

ComplexImage rasterize(PhantomSpec const &phantom, int size, double seconds, int supersample)
{
  phantom.validate();
  if (supersample < 1) { throw InvalidArgument("rasterize: supersample must be >= 1"); }
  double const px = size / phantom.fov;
  auto const centers = phantom.tube_centers(seconds);
  ComplexImage img(size, size);
  double const w = 1.0 / (supersample * supersample);
  for (std::size_t i = 0; i < phantom.tubes.size(); ++i) {
    double const cx = centers[i].first * px;
    double const cy = centers[i].second * px;
    double const r = phantom.tubes[i].tube_radius * px;
    int const x0 = std::max(0, static_cast<int>(std::floor(cx - r)) + size / 2 - 1);
    int const x1 = std::min(size - 1, static_cast<int>(std::ceil(cx + r)) + size / 2 + 1);
    int const y0 = std::max(0, static_cast<int>(std::floor(cy - r)) + size / 2 - 1);
    int const y1 = std::min(size - 1, static_cast<int>(std::ceil(cy + r)) + size / 2 + 1);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        int inside = 0;
        for (int sy = 0; sy < supersample; ++sy) {
          for (int sx = 0; sx < supersample; ++sx) {
            double const u = x - size / 2 - 0.5 + (sx + 0.5) / supersample - cx;
            double const v = y - size / 2 - 0.5 + (sy + 0.5) / supersample - cy;
            inside += u * u + v * v <= r * r;
          }
        }
        img(x, y) += phantom.tubes[i].amplitude * inside * w;
      }
    }
  }
  return img;
}

double dc_magnitude(PhantomSpec const &phantom, CoilModel const &coils, AcquisitionSpec const &acq)
{
  double const px = acq.base_resolution / phantom.fov;
  auto const centers = phantom.tube_centers(0.0);
  double best = 0.0;
  for (auto const &c : coils.coils) {
    cdouble dc = 0.0;
    for (std::size_t i = 0; i < phantom.tubes.size(); ++i) {
      double const r = phantom.tubes[i].tube_radius * px;
      dc += coil_value(c, centers[i].first / phantom.fov, centers[i].second / phantom.fov) * phantom.tubes[i].amplitude *
            pi * r * r;
    }
    best = std::max(best, std::abs(dc));
  }
  return best;
}

SimulatedSeries simulate_series(PhantomSpec const &phantom, CoilModel const &coils, AcquisitionSpec const &acq)
{
  phantom.validate();
  coils.validate();
  acq.validate();
  int const n = acq.base_resolution;
  double const px = n / phantom.fov;
  std::size_t const tube_count = phantom.tubes.size();
  int const coil_count = coils.count();

  SimulatedSeries out;
  out.noise_sigma = acq.noise_sigma.value_or(1e-3 * dc_magnitude(phantom, coils, acq));

  for (int t = 0; t < acq.frames; ++t) {
    MultiCoilFrame frame;
    frame.frame_index = t;
    frame.trajectory = make_trajectory(acq, t);
    auto const &traj = frame.trajectory;
    int const ns = traj.samples_per_spoke;
    frame.coils.assign(coil_count, SampleVector(traj.size()));

    std::vector<cdouble> weights(tube_count * coil_count);
    std::vector<cdouble> discs(tube_count);
    for (int j = 0; j < traj.spokes; ++j) {
      auto const centers = phantom.tube_centers(traj.spoke_times[j]);
      for (int l = 0; l < coil_count; ++l) {
        for (std::size_t i = 0; i < tube_count; ++i) {
          weights[l * tube_count + i] =
            coil_value(coils.coils[l], centers[i].first / phantom.fov, centers[i].second / phantom.fov);
        }
      }
      for (int s = 0; s < ns; ++s) {
        std::size_t const idx = static_cast<std::size_t>(j) * ns + s;
        for (std::size_t i = 0; i < tube_count; ++i) {
          auto const &tube = phantom.tubes[i];
          discs[i] = disc_kspace(centers[i].first * px, centers[i].second * px, tube.tube_radius * px, tube.amplitude,
                                 traj.samples[idx]);
        }
        for (int l = 0; l < coil_count; ++l) {
          cdouble v = 0.0;
          for (std::size_t i = 0; i < tube_count; ++i) { v += weights[l * tube_count + i] * discs[i]; }
          frame.coils[l][idx] = v;
        }
      }
    }

    if (out.noise_sigma > 0.0) {
      for (int l = 0; l < coil_count; ++l) {
        std::seed_seq seq{static_cast<std::uint64_t>(acq.seed), static_cast<std::uint64_t>(t),
                          static_cast<std::uint64_t>(l)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> noise(0.0, out.noise_sigma / std::sqrt(2.0));
        for (auto &v : frame.coils[l]) {
          double const re = noise(rng);
          double const im = noise(rng);
          v += cdouble(re, im);
        }
      }
    }

    double const mid = (static_cast<double>(t) * acq.spokes_per_frame + 0.5 * (acq.spokes_per_frame - 1)) *
                       acq.repetition_time;
    out.truth.push_back(rasterize(phantom, n, mid));
    out.frames.push_back(std::move(frame));
  }
  return out;
}

} // namespace rtmri
