#pragma once

#include "rtmri/core.hpp"
#include "rtmri/nufft.hpp"
#include "rtmri/phantom.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace testing {

using namespace rtmri;

inline ComplexImage random_image(std::mt19937_64 &rng, int w, int h)
{
  std::normal_distribution<double> d;
  ComplexImage img(w, h);
  for (auto &v : img.data()) { v = cdouble(d(rng), d(rng)); }
  return img;
}

inline RealImage random_real(std::mt19937_64 &rng, int w, int h)
{
  std::normal_distribution<double> d;
  RealImage img(w, h);
  for (auto &v : img.data()) { v = d(rng); }
  return img;
}

inline SampleVector random_samples(std::mt19937_64 &rng, std::size_t n)
{
  std::normal_distribution<double> d;
  SampleVector v(n);
  for (auto &x : v) { x = cdouble(d(rng), d(rng)); }
  return v;
}

inline Unknowns random_unknowns(std::mt19937_64 &rng, int n, std::vector<int> offsets, int coils)
{
  auto x = Unknowns::zeros(n, n, offsets, coils);
  x.density() = random_image(rng, n, n);
  for (auto &c : x.coils()) { c = random_image(rng, n, n); }
  return x;
}

/// Direct evaluation of sum_x img(x) exp(-2 pi i <k, x - n/2>).
inline SampleVector direct_dft(ComplexImage const &img, RadialTrajectory const &traj)
{
  SampleVector out(traj.size());
  int const w = img.width();
  int const h = img.height();
  for (std::size_t j = 0; j < traj.size(); ++j) {
    cdouble s = 0.0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double const ph = -2.0 * std::numbers::pi * (traj.samples[j].kx * (x - w / 2) + traj.samples[j].ky * (y - h / 2));
        s += img(x, y) * std::polar(1.0, ph);
      }
    }
    out[j] = s;
  }
  return out;
}

inline ComplexImage direct_adjoint(SampleVector const &y, RadialTrajectory const &traj, int n)
{
  ComplexImage out(n, n);
  for (int yy = 0; yy < n; ++yy) {
    for (int x = 0; x < n; ++x) {
      cdouble s = 0.0;
      for (std::size_t j = 0; j < traj.size(); ++j) {
        double const ph = 2.0 * std::numbers::pi * (traj.samples[j].kx * (x - n / 2) + traj.samples[j].ky * (yy - n / 2));
        s += y[j] * std::polar(1.0, ph);
      }
      out(x, yy) = s;
    }
  }
  return out;
}

inline RadialTrajectory radial(int n, int spokes, int frame = 0, int interleaves = 1)
{
  AcquisitionSpec acq;
  acq.base_resolution = n;
  acq.spokes_per_frame = spokes;
  acq.interleaves = interleaves;
  return make_trajectory(acq, frame);
}

inline double rel_diff(std::span<cdouble const> a, std::span<cdouble const> b)
{
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / den);
}

/// |<A x, y> - <x, A* y>| / (|<A x, y>|)
inline double dot_test(cdouble lhs, cdouble rhs) { return std::abs(lhs - rhs) / std::abs(lhs); }

/// High-accuracy gridding parameters for tests that need exactness.
inline KbParams accurate_kb()
{
  double const width = 8.0;
  double const os = 2.0;
  double const beta = std::numbers::pi * std::sqrt(width * width / (os * os) * (os - 0.5) * (os - 0.5) - 0.8);
  return {8, beta, os, 10000};
}

} // namespace testing

namespace testing {

inline MultiCoilFrame random_frame(std::mt19937_64 &rng, int n, int spokes, int coils, int frame = 0)
{
  MultiCoilFrame f;
  f.frame_index = frame;
  f.trajectory = radial(n, spokes, frame, 5);
  for (int l = 0; l < coils; ++l) { f.coils.push_back(random_samples(rng, f.trajectory.size())); }
  return f;
}

inline cdouble samples_dot(std::vector<SampleVector> const &a, std::vector<SampleVector> const &b)
{
  cdouble s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) { s += dot(a[i], b[i]); }
  return s;
}

inline double samples_rel_diff(std::vector<SampleVector> const &a, std::vector<SampleVector> const &b)
{
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      num += std::norm(a[i][j] - b[i][j]);
      den += std::norm(b[i][j]);
    }
  }
  return std::sqrt(num / den);
}

} // namespace testing
