#include "doctest.h"
#include "support.hpp"

#include "rtmri/flow.hpp"

using namespace rtmri;
using namespace testing;

namespace {

MotionField random_field(std::mt19937_64 &rng, int n, double amp)
{
  std::uniform_real_distribution<double> u(-amp, amp);
  auto f = MotionField::zeros(n, n);
  for (auto &v : f.ux.data()) { v = u(rng); }
  for (auto &v : f.uy.data()) { v = u(rng); }
  return f;
}

RealImage blob(int n, double cx, double cy, double s)
{
  RealImage img(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) { img(x, y) = std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2 * s * s)); }
  }
  return img;
}

} // namespace

TEST_CASE("keys kernel")
{
  CHECK(keys_cubic(0.0) == 1.0);
  CHECK(keys_cubic(1.0) == 0.0);
  CHECK(keys_cubic(2.0) == 0.0);
  CHECK(keys_cubic(2.5) == 0.0);
  for (double t = 0.0; t < 1.0; t += 0.1) {
    CHECK(keys_cubic(t + 1) + keys_cubic(t) + keys_cubic(1 - t) + keys_cubic(2 - t) == doctest::Approx(1.0));
  }
}

TEST_CASE("bicubic warp")
{
  std::mt19937_64 rng(21);
  int const n = 12;
  auto img = random_image(rng, n, n);
  CHECK(warp_bicubic(img, MotionField::zeros(n, n)) == img);
  CHECK(warp_adjoint(img, MotionField::zeros(n, n)) == img);

  SUBCASE("ramp shifted by one pixel")
  {
    RealImage ramp(n, n);
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) { ramp(x, y) = 0.5 * x + 0.25 * y + 0.01 * x * x; }
    }
    auto f = MotionField::zeros(n, n);
    for (auto &v : f.ux.data()) { v = 1.0; }
    auto out = warp_bicubic(ramp, f);
    for (int y = 2; y < n - 2; ++y) {
      for (int x = 2; x < n - 3; ++x) { CHECK(out(x, y) == doctest::Approx(ramp(x + 1, y)).epsilon(1e-12)); }
    }
    for (auto &v : f.ux.data()) { v = 0.3; }
    for (auto &v : f.uy.data()) { v = -0.6; }
    out = warp_bicubic(ramp, f);
    for (int y = 3; y < n - 3; ++y) {
      for (int x = 3; x < n - 3; ++x) {
        double const sx = x + 0.3;
        double const sy = y - 0.6;
        CHECK(out(x, y) == doctest::Approx(0.5 * sx + 0.25 * sy + 0.01 * sx * sx).epsilon(1e-12));
      }
    }
  }
  SUBCASE("constant image stays constant")
  {
    ComplexImage c(n, n, cdouble(2.0, -1.0));
    auto out = warp_bicubic(c, random_field(rng, n, 4.0));
    for (auto v : out.data()) { CHECK(std::abs(v - cdouble(2.0, -1.0)) < 1e-12); }
  }
  SUBCASE("adjoint dot test and linearity")
  {
    for (int i = 0; i < 20; ++i) {
      auto f = random_field(rng, n, 3.0);
      auto x = random_image(rng, n, n);
      auto y = random_image(rng, n, n);
      auto lhs = dot(warp_bicubic(x, f).data(), y.data());
      auto rhs = dot(x.data(), warp_adjoint(y, f).data());
      CHECK(dot_test(lhs, rhs) < 1e-10);
      auto comb = x;
      for (std::size_t k = 0; k < comb.size(); ++k) { comb[k] = 2.0 * x[k] - cdouble(0, 1) * y[k]; }
      auto a = warp_bicubic(comb, f);
      auto wx = warp_bicubic(x, f);
      auto wy = warp_bicubic(y, f);
      for (std::size_t k = 0; k < a.size(); ++k) { CHECK(std::abs(a[k] - (2.0 * wx[k] - cdouble(0, 1) * wy[k])) < 1e-12); }
    }
    CHECK(l2_norm(warp_adjoint(ComplexImage(n, n), random_field(rng, n, 2.0)).data()) == 0.0);
  }
  CHECK_THROWS_AS(warp_bicubic(img, MotionField::zeros(8, 8)), InvalidArgument);
}

TEST_CASE("flow config validation")
{
  FlowConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.tau = 1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = FlowConfig{};
  cfg.lambda = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("broad streak is absorbed by the artifact term")
{
  int const n = 64;
  RealImage obj(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      double const r = std::hypot(x - 32.0, y - 32.0);
      obj(x, y) = r < 12 ? 0.5 : (r < 14 ? 0.25 * (14 - r) : 0.0);
    }
  }
  auto src = obj;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      double const d = (x - y + 6) / std::sqrt(2.0);
      src(x, y) += 0.5 * std::exp(-d * d / 18.0);
    }
  }
  auto d = estimate_motion_with_diagnostics({src, obj, {}});
  double m = 0.0;
  int k = 0;
  for (std::size_t i = 0; i < obj.size(); ++i) {
    if (obj[i] > 0.0) {
      m += std::hypot(d.field.ux[i], d.field.uy[i]);
      ++k;
    }
  }
  CHECK(m / k < 0.2);
  double vmin = 0.0;
  for (auto v : d.artifact.data()) { vmin = std::min(vmin, v); }
  CHECK(vmin < -0.4);
}

TEST_CASE("flow estimation")
{
  int const n = 48;
  auto a = blob(n, 22, 24, 5);
  SUBCASE("identical images")
  {
    auto u = estimate_motion({a, a, {}});
    CHECK(u.max_magnitude() < 0.05);
  }
  SUBCASE("one pixel shift")
  {
    // src(x + 1) = dst(x) when dst is src moved by -1
    auto b = blob(n, 21, 24, 5);
    auto u = estimate_motion({a, b, {}});
    double err = 0.0;
    int count = 0;
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        if (a(x, y) > 0.1) {
          err += std::hypot(u.ux(x, y) - 1.0, u.uy(x, y));
          ++count;
        }
      }
    }
    CHECK(err / count < 0.3);
  }
  SUBCASE("large lambda on an identical pair")
  {
    FlowConfig cfg;
    cfg.lambda = 1e3;
    auto u = estimate_motion({a, a, cfg});
    CHECK(u.max_magnitude() < 0.05);
  }
  SUBCASE("objective decreases across levels")
  {
    auto d = estimate_motion_with_diagnostics({a, blob(n, 20, 25, 5), {}});
    for (std::size_t i = 1; i < d.level_objective.size(); ++i) {
      CHECK(d.level_objective[i] <= d.level_objective[i - 1] * (1.0 + 1e-9));
    }
  }
  SUBCASE("non-finite input")
  {
    auto bad = a;
    bad[5] = NAN;
    CHECK_THROWS_AS(estimate_motion({bad, a, {}}), InvalidArgument);
  }
}
