#include "doctest.h"
#include "support.hpp"

using namespace rtmri;
using namespace testing;

namespace {

double kb_formula(double r, double width, double beta)
{
  double const t = 2.0 * r / width;
  if (std::abs(t) >= 1.0) { return 0.0; }
  return std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - t * t)) / std::cyl_bessel_i(0.0, beta);
}

ComplexImage gaussian_image(std::mt19937_64 &rng, int n)
{
  std::normal_distribution<double> d;
  ComplexImage img(n, n);
  double const s = n / 5.0;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      double const r2 = (x - n / 2) * (x - n / 2) + (y - n / 2) * (y - n / 2);
      img(x, y) = std::exp(-r2 / (2 * s * s)) * cdouble(1.0 + 0.1 * d(rng), 0.1 * d(rng));
    }
  }
  return img;
}

} // namespace

TEST_CASE("kb table")
{
  auto tbl = build_kb_table(16);
  CHECK(tbl.grid_size() == 24);
  CHECK(tbl.kernel(0.0) == doctest::Approx(1.0));
  CHECK(tbl.kernel(3.0) == 0.0);
  CHECK(tbl.kernel(-3.5) == 0.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    double const r = u(rng);
    CHECK(std::abs(tbl.kernel(r) - kb_formula(r, 6, 13.8551)) < 1e-6);
  }
  for (double r = 0.0; r < 2.9; r += 0.1) { CHECK(tbl.kernel(r + 0.1) < tbl.kernel(r)); }
  CHECK_THROWS_AS(build_kb_table(16, {5, 13.8551, 1.5, 1000}), InvalidArgument);
  CHECK_THROWS_AS(build_kb_table(16, {6, 13.8551, 1.0, 1000}), InvalidArgument);
  CHECK_THROWS_AS(build_kb_table(16, {6, 13.8551, 1.5, 50}), InvalidArgument);
}

TEST_CASE("nufft forward simple values")
{
  auto tbl = build_kb_table(4, accurate_kb());
  RadialTrajectory traj;
  traj.spokes = 1;
  traj.samples_per_spoke = 2;
  traj.samples = {{0.0, 0.0}, {0.2, -0.3}};
  traj.spoke_times = {0.0};
  ComplexImage ones(4, 4, 1.0);
  auto y = nufft_forward(ones, traj, tbl);
  CHECK(std::abs(y[0] - 16.0) < 1e-6);
  ComplexImage delta(4, 4);
  delta(2, 2) = 1.0;
  auto d = nufft_forward(delta, traj, tbl);
  CHECK(std::abs(std::abs(d[1]) - 1.0) < 1e-6);

  auto back = nufft_adjoint(SampleVector{1.0, 0.0}, traj, tbl);
  for (auto v : back.data()) { CHECK(std::abs(v - back[0]) < 1e-6); }
  auto zero = nufft_adjoint(SampleVector{0.0, 0.0}, traj, tbl);
  CHECK(l2_norm(zero.data()) == 0.0);

  traj.samples[1].kx = 0.5;
  CHECK_THROWS_AS(nufft_forward(ones, traj, tbl), InvalidArgument);
  traj.samples[1].kx = 0.2;
  CHECK_THROWS_AS(nufft_adjoint(SampleVector{1.0}, traj, tbl), InvalidArgument);
}

TEST_CASE("nufft forward accuracy against direct DFT")
{
  std::mt19937_64 rng(11);
  auto traj = radial(16, 5);
  traj.samples.resize(0);
  // 5 spokes x 32 samples
  CHECK(radial(16, 5).samples_per_spoke == 32);
  traj = radial(16, 5);
  SUBCASE("high-accuracy kernel")
  {
    auto tbl = build_kb_table(16, accurate_kb());
    auto img = random_image(rng, 16, 16);
    CHECK(rel_diff(nufft_forward(img, traj, tbl), direct_dft(img, traj)) < 1e-5);
  }
  SUBCASE("default kernel, smooth image")
  {
    auto tbl = build_kb_table(16);
    auto img = gaussian_image(rng, 16);
    CHECK(rel_diff(nufft_forward(img, traj, tbl), direct_dft(img, traj)) < 1e-3);
  }
  SUBCASE("error does not grow with table resolution")
  {
    auto img = random_image(rng, 16, 16);
    auto ref = direct_dft(img, traj);
    double const e1 = rel_diff(nufft_forward(img, traj, build_kb_table(16, {6, 13.8551, 1.5, 1000})), ref);
    double const e2 = rel_diff(nufft_forward(img, traj, build_kb_table(16, {6, 13.8551, 1.5, 2000})), ref);
    CHECK(e2 <= e1 * (1.0 + 1e-3));
  }
}

TEST_CASE("nufft adjoint dot test")
{
  std::mt19937_64 rng(12);
  for (int n : {16, 32}) {
    auto tbl = build_kb_table(n);
    auto traj = radial(n, 7, 1, 3);
    for (int i = 0; i < 25; ++i) {
      auto x = random_image(rng, n, n);
      auto y = random_samples(rng, traj.size());
      auto lhs = dot(nufft_forward(x, traj, tbl), y);
      auto rhs = dot(x.data(), nufft_adjoint(y, traj, tbl).data());
      CHECK(dot_test(lhs, rhs) < 1e-10);
    }
  }
}

TEST_CASE("psf normal operator")
{
  std::mt19937_64 rng(13);
  SUBCASE("full Cartesian sampling on the 2x grid")
  {
    int const n = 8;
    RadialTrajectory traj;
    for (int v = 0; v < 2 * n; ++v) {
      for (int u = 0; u < 2 * n; ++u) { traj.samples.push_back({(u - n) / (2.0 * n), (v - n) / (2.0 * n)}); }
    }
    traj.spokes = 1;
    traj.samples_per_spoke = static_cast<int>(traj.samples.size());
    traj.spoke_times = {0.0};
    auto psf = build_psf(traj, build_kb_table(n, accurate_kb()), n);
    for (auto v : psf.grid().data()) { CHECK(std::abs(v - cdouble(1.0, 0.0)) < 1e-6); }
    auto img = random_image(rng, n, n);
    auto out = normal_apply(img, psf);
    // unnormalized transforms: F* F = (2n)^2 on the 2x grid
    for (std::size_t i = 0; i < img.size(); ++i) { CHECK(std::abs(out[i] - 4.0 * n * n * img[i]) < 1e-4 * n * n); }
  }
  SUBCASE("empty trajectory")
  {
    RadialTrajectory traj;
    auto psf = build_psf(traj, build_kb_table(8), 8);
    CHECK(l2_norm(psf.grid().data()) == 0.0);
  }
  SUBCASE("matches direct summation")
  {
    int const n = 16;
    auto traj = radial(n, 5, 2, 5);
    auto img = random_image(rng, n, n);
    auto exact = direct_adjoint(direct_dft(img, traj), traj, n);
    auto psf = build_psf(traj, build_kb_table(n, accurate_kb()), n);
    CHECK(rel_diff(normal_apply(img, psf).data(), exact.data()) < 1e-5);
    auto coarse = build_psf(traj, build_kb_table(n), n);
    CHECK(rel_diff(normal_apply(img, coarse).data(), exact.data()) < 1e-3);

    ComplexImage corner(n, n);
    for (int y = 0; y < n / 2; ++y) {
      for (int x = 0; x < n / 2; ++x) { corner(x, y) = img(x, y); }
    }
    auto exact_corner = direct_adjoint(direct_dft(corner, traj), traj, n);
    CHECK(rel_diff(normal_apply(corner, psf).data(), exact_corner.data()) < 1e-5);
  }
  SUBCASE("self-adjoint and positive semidefinite")
  {
    int const n = 16;
    auto traj = radial(n, 9);
    auto psf = build_psf(traj, build_kb_table(n), n);
    for (int i = 0; i < 10; ++i) {
      auto x = random_image(rng, n, n);
      auto y = random_image(rng, n, n);
      auto const xx = dot(x.data(), normal_apply(x, psf).data());
      CHECK(xx.real() >= 0.0);
      CHECK(std::abs(xx.imag()) < 1e-10 * std::abs(xx));
      auto const a = dot(y.data(), normal_apply(x, psf).data());
      auto const b = dot(normal_apply(y, psf).data(), x.data());
      CHECK(dot_test(a, b) < 1e-10);
    }
    CHECK(l2_norm(normal_apply(ComplexImage(n, n), psf).data()) == 0.0);
    CHECK_THROWS_AS(normal_apply(ComplexImage(8, 8), psf), InvalidArgument);
  }
}
