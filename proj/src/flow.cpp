#include "rtmri/flow.hpp"

#include <algorithm>
#include <cmath>

namespace rtmri {

MotionField::MotionField(RealImage ux_, RealImage uy_) : ux(std::move(ux_)), uy(std::move(uy_))
{
  require_same_shape(ux, uy, "MotionField");
  if (!ux.all_finite() || !uy.all_finite()) { throw InvalidArgument("MotionField: non-finite displacement"); }
}

MotionField MotionField::zeros(int width, int height) { return {RealImage(width, height), RealImage(width, height)}; }

bool MotionField::is_zero() const
{
  auto nz = [](double v) { return v != 0.0; };
  return std::none_of(ux.data().begin(), ux.data().end(), nz) && std::none_of(uy.data().begin(), uy.data().end(), nz);
}

double MotionField::max_magnitude() const
{
  double m = 0.0;
  for (std::size_t i = 0; i < ux.size(); ++i) { m = std::max(m, std::hypot(ux[i], uy[i])); }
  return m;
}

double keys_cubic(double t)
{
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t <= 1.0) { return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0; }
  if (t < 2.0) { return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a; }
  return 0.0;
}

BicubicWarp::BicubicWarp(MotionField const &field) : width_(field.width()), height_(field.height())
{
  taps_.resize(static_cast<std::size_t>(width_) * height_);
  auto axis = [](double s, int n, std::array<int, 4> &idx, std::array<double, 4> &w) {
    s = std::clamp(s, 0.0, static_cast<double>(n - 1));
    int const i0 = static_cast<int>(std::floor(s));
    double const f = s - i0;
    for (int k = 0; k < 4; ++k) {
      idx[k] = std::clamp(i0 - 1 + k, 0, n - 1);
      w[k] = keys_cubic(f - (k - 1));
    }
  };
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      auto &t = taps_[static_cast<std::size_t>(y) * width_ + x];
      axis(x + field.ux(x, y), width_, t.ix, t.wx);
      axis(y + field.uy(x, y), height_, t.iy, t.wy);
    }
  }
}

template <typename T>
Image<T> BicubicWarp::apply(Image<T> const &img) const
{
  if (img.width() != width_ || img.height() != height_) { throw InvalidArgument("warp_bicubic: dimension mismatch"); }
  Image<T> out(width_, height_);
  for (std::size_t p = 0; p < taps_.size(); ++p) {
    auto const &t = taps_[p];
    T acc{};
    for (int j = 0; j < 4; ++j) {
      T row{};
      for (int i = 0; i < 4; ++i) { row += t.wx[i] * img(t.ix[i], t.iy[j]); }
      acc += t.wy[j] * row;
    }
    out[p] = acc;
  }
  return out;
}

template <typename T>
Image<T> BicubicWarp::adjoint(Image<T> const &img) const
{
  if (img.width() != width_ || img.height() != height_) { throw InvalidArgument("warp_adjoint: dimension mismatch"); }
  Image<T> out(width_, height_);
  for (std::size_t p = 0; p < taps_.size(); ++p) {
    auto const &t = taps_[p];
    for (int j = 0; j < 4; ++j) {
      T const v = t.wy[j] * img[p];
      for (int i = 0; i < 4; ++i) { out(t.ix[i], t.iy[j]) += t.wx[i] * v; }
    }
  }
  return out;
}

template Image<cdouble> BicubicWarp::apply(Image<cdouble> const &) const;
template Image<double> BicubicWarp::apply(Image<double> const &) const;
template Image<cdouble> BicubicWarp::adjoint(Image<cdouble> const &) const;
template Image<double> BicubicWarp::adjoint(Image<double> const &) const;

ComplexImage warp_bicubic(ComplexImage const &img, MotionField const &field)
{
  require_same_shape(img, field.ux, "warp_bicubic");
  return BicubicWarp(field).apply(img);
}

ComplexImage warp_adjoint(ComplexImage const &img, MotionField const &field)
{
  require_same_shape(img, field.ux, "warp_adjoint");
  return BicubicWarp(field).adjoint(img);
}

RealImage warp_bicubic(RealImage const &img, MotionField const &field)
{
  require_same_shape(img, field.ux, "warp_bicubic");
  return BicubicWarp(field).apply(img);
}

void FlowConfig::validate() const
{
  if (!(lambda > 0.0) || !(mu > 0.0)) { throw InvalidArgument("FlowConfig: lambda and mu must be positive"); }
  if (primal_dual_iters < 1 || pyramid_levels < 1 || warps_per_level < 1) {
    throw InvalidArgument("FlowConfig: iteration counts must be positive");
  }
  // The stacked forward-difference gradient has squared norm at most 8.
  if (!(tau > 0.0) || !(sigma > 0.0) || tau * sigma * 8.0 > 1.0 + 1e-12) {
    throw InvalidArgument("FlowConfig: step sizes violate tau * sigma * 8 <= 1");
  }
  if (!(u_step_scale > 0.0)) { throw InvalidArgument("FlowConfig: u_step_scale must be positive"); }
}

namespace {

// Forward differences with Neumann boundary.
void gradient(RealImage const &f, RealImage &gx, RealImage &gy)
{
  int const w = f.width();
  int const h = f.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      gx(x, y) = x + 1 < w ? f(x + 1, y) - f(x, y) : 0.0;
      gy(x, y) = y + 1 < h ? f(x, y + 1) - f(x, y) : 0.0;
    }
  }
}

// Negative adjoint of gradient().
void divergence(RealImage const &px, RealImage const &py, RealImage &div)
{
  int const w = px.width();
  int const h = px.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double dx = 0.0;
      if (x == 0) {
        dx = px(x, y);
      } else if (x == w - 1) {
        dx = -px(x - 1, y);
      } else {
        dx = px(x, y) - px(x - 1, y);
      }
      double dy = 0.0;
      if (y == 0) {
        dy = py(x, y);
      } else if (y == h - 1) {
        dy = -py(x, y - 1);
      } else {
        dy = py(x, y) - py(x, y - 1);
      }
      div(x, y) = dx + dy;
    }
  }
}

void centered_gradient(RealImage const &f, RealImage &gx, RealImage &gy)
{
  int const w = f.width();
  int const h = f.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int const xl = std::max(x - 1, 0);
      int const xr = std::min(x + 1, w - 1);
      int const yl = std::max(y - 1, 0);
      int const yr = std::min(y + 1, h - 1);
      gx(x, y) = (f(xr, y) - f(xl, y)) / std::max(1, xr - xl);
      gy(x, y) = (f(x, yr) - f(x, yl)) / std::max(1, yr - yl);
    }
  }
}

double total_variation(RealImage const &f)
{
  RealImage gx(f.width(), f.height());
  RealImage gy(f.width(), f.height());
  gradient(f, gx, gy);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) { s += std::hypot(gx[i], gy[i]); }
  return s;
}

RealImage gaussian_blur(RealImage const &f, double sigma)
{
  int const radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (auto &v : k) { v /= sum; }
  int const w = f.width();
  int const h = f.height();
  RealImage tmp(w, h);
  RealImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) { acc += k[i + radius] * f(std::clamp(x + i, 0, w - 1), y); }
      tmp(x, y) = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) { acc += k[i + radius] * tmp(x, std::clamp(y + i, 0, h - 1)); }
      out(x, y) = acc;
    }
  }
  return out;
}

RealImage downsample(RealImage const &f)
{
  auto const blurred = gaussian_blur(f, 0.6);
  int const w = (f.width() + 1) / 2;
  int const h = (f.height() + 1) / 2;
  RealImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      int cnt = 0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          int const sx = 2 * x + dx;
          int const sy = 2 * y + dy;
          if (sx < f.width() && sy < f.height()) {
            acc += blurred(sx, sy);
            ++cnt;
          }
        }
      }
      out(x, y) = acc / cnt;
    }
  }
  return out;
}

// Bilinear resampling onto a (width x height) grid, values multiplied by `gain`.
RealImage resample(RealImage const &f, int width, int height, double gain)
{
  RealImage out(width, height);
  double const sx = static_cast<double>(f.width()) / width;
  double const sy = static_cast<double>(f.height()) / height;
  for (int y = 0; y < height; ++y) {
    double const fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(f.height() - 1));
    int const y0 = std::min(static_cast<int>(fy), f.height() - 2);
    double const ay = fy - y0;
    for (int x = 0; x < width; ++x) {
      double const fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(f.width() - 1));
      int const x0 = std::min(static_cast<int>(fx), f.width() - 2);
      double const ax = fx - x0;
      double const v = (1 - ay) * ((1 - ax) * f(x0, y0) + ax * f(x0 + 1, y0)) +
                       ay * ((1 - ax) * f(x0, y0 + 1) + ax * f(x0 + 1, y0 + 1));
      out(x, y) = gain * v;
    }
  }
  return out;
}

struct DualField {
  RealImage px;
  RealImage py;
  DualField(int w, int h) : px(w, h), py(w, h) {}
};

// p <- proj_{|p| <= bound}(p + sigma * grad(bar))
void dual_step(DualField &p, RealImage const &bar, double sigma, double bound, RealImage &gx, RealImage &gy)
{
  gradient(bar, gx, gy);
  for (std::size_t i = 0; i < bar.size(); ++i) {
    double const qx = p.px[i] + sigma * gx[i];
    double const qy = p.py[i] + sigma * gy[i];
    double const scale = std::max(1.0, std::hypot(qx, qy) / bound);
    p.px[i] = qx / scale;
    p.py[i] = qy / scale;
  }
}

struct LevelState {
  RealImage ux;
  RealImage uy;
  RealImage v;
};

void solve_level(RealImage const &src, RealImage const &dst, LevelState &st, FlowConfig const &cfg, double mu)
{
  int const w = src.width();
  int const h = src.height();
  std::size_t const n = src.size();
  RealImage gx(w, h), gy(w, h), rho_c(w, h);
  RealImage tx(w, h), ty(w, h), div(w, h);
  // block steps: u moves `u_step_scale` times faster, its duals that much slower
  double const tau_u = cfg.tau * cfg.u_step_scale;
  double const sigma_u = cfg.sigma / cfg.u_step_scale;
  double const tau_v = cfg.tau;
  double const sigma_v = cfg.sigma;

  DualField p1(w, h), p2(w, h), pv(w, h);
  for (int warp = 0; warp < cfg.warps_per_level; ++warp) {
    MotionField const field(st.ux, st.uy);
    auto const warped = warp_bicubic(src, field);
    centered_gradient(warped, gx, gy);
    for (std::size_t i = 0; i < n; ++i) {
      rho_c[i] = warped[i] - gx[i] * st.ux[i] - gy[i] * st.uy[i] - dst[i];
    }

    RealImage bar_x = st.ux, bar_y = st.uy, bar_v = st.v;
    for (int it = 0; it < cfg.primal_dual_iters; ++it) {
      dual_step(p1, bar_x, sigma_u, cfg.lambda, tx, ty);
      dual_step(p2, bar_y, sigma_u, cfg.lambda, tx, ty);
      dual_step(pv, bar_v, sigma_v, mu, tx, ty);

      RealImage const old_x = st.ux, old_y = st.uy, old_v = st.v;
      divergence(p1.px, p1.py, div);
      for (std::size_t i = 0; i < n; ++i) { st.ux[i] += tau_u * div[i]; }
      divergence(p2.px, p2.py, div);
      for (std::size_t i = 0; i < n; ++i) { st.uy[i] += tau_u * div[i]; }
      divergence(pv.px, pv.py, div);
      for (std::size_t i = 0; i < n; ++i) { st.v[i] += tau_v * div[i]; }

      // prox of |rho_c + g.u + v| in the metric of the block steps
      for (std::size_t i = 0; i < n; ++i) {
        double const a = tau_u * (gx[i] * gx[i] + gy[i] * gy[i]) + tau_v;
        double const r = rho_c[i] + gx[i] * st.ux[i] + gy[i] * st.uy[i] + st.v[i];
        double const t = r < -a ? 1.0 : (r > a ? -1.0 : -r / a);
        st.ux[i] += t * tau_u * gx[i];
        st.uy[i] += t * tau_u * gy[i];
        st.v[i] += t * tau_v;
      }

      for (std::size_t i = 0; i < n; ++i) {
        bar_x[i] = 2.0 * st.ux[i] - old_x[i];
        bar_y[i] = 2.0 * st.uy[i] - old_y[i];
        bar_v[i] = 2.0 * st.v[i] - old_v[i];
      }
    }
    double const limit = std::hypot(static_cast<double>(w), static_cast<double>(h));
    for (std::size_t i = 0; i < n; ++i) {
      st.ux[i] = std::clamp(st.ux[i], -limit, limit);
      st.uy[i] = std::clamp(st.uy[i], -limit, limit);
    }
  }
}

void check_image(RealImage const &img, char const *name)
{
  if (img.empty() || !img.all_finite()) {
    throw InvalidArgument(std::string("estimate_motion: ") + name + " has non-finite values");
  }
}

} // namespace

double flow_objective(RealImage const &src, RealImage const &dst, MotionField const &u, RealImage const &v,
                      FlowConfig const &cfg)
{
  auto const warped = warp_bicubic(src, u);
  double data = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) { data += std::abs(warped[i] - dst[i] + v[i]); }
  return data + cfg.lambda * (total_variation(u.ux) + total_variation(u.uy)) + cfg.mu * total_variation(v);
}

FlowDiagnostics estimate_motion_with_diagnostics(FlowProblem const &problem)
{
  auto const &cfg = problem.config;
  cfg.validate();
  check_image(problem.src, "src");
  check_image(problem.dst, "dst");
  require_same_shape(problem.src, problem.dst, "estimate_motion");

  std::vector<RealImage> src_pyr{problem.src};
  std::vector<RealImage> dst_pyr{problem.dst};
  for (int l = 1; l < cfg.pyramid_levels; ++l) {
    if (src_pyr.back().width() < 16 || src_pyr.back().height() < 16) { break; }
    src_pyr.push_back(downsample(src_pyr.back()));
    dst_pyr.push_back(downsample(dst_pyr.back()));
  }

  int const full_w = problem.src.width();
  int const full_h = problem.src.height();
  FlowDiagnostics diag;
  LevelState st;
  for (int l = static_cast<int>(src_pyr.size()) - 1; l >= 0; --l) {
    int const w = src_pyr[l].width();
    int const h = src_pyr[l].height();
    if (st.ux.empty()) {
      st = {RealImage(w, h), RealImage(w, h), RealImage(w, h)};
    } else {
      double const gain = static_cast<double>(w) / st.ux.width();
      st.ux = resample(st.ux, w, h, gain);
      st.uy = resample(st.uy, w, h, gain);
      st.v = RealImage(w, h);
    }
    // data term scales with pixel area, TV(v) with length: coarse pixels weight v's TV less
    double const mu = cfg.mu * (static_cast<double>(w) / full_w);
    solve_level(src_pyr[l], dst_pyr[l], st, cfg, mu);

    double const gain = static_cast<double>(full_w) / w;
    MotionField const full(resample(st.ux, full_w, full_h, gain), resample(st.uy, full_w, full_h, gain));
    diag.level_objective.push_back(
      flow_objective(problem.src, problem.dst, full, resample(st.v, full_w, full_h, 1.0), cfg));
  }
  diag.field = MotionField(st.ux, st.uy);
  diag.artifact = st.v;
  return diag;
}

MotionField estimate_motion(FlowProblem const &problem) { return estimate_motion_with_diagnostics(problem).field; }

std::pair<RealImage, RealImage> normalize_pair(RealImage const &a, RealImage const &b)
{
  require_same_shape(a, b, "normalize_pair");
  double peak = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) { peak = std::max({peak, std::abs(a[i]), std::abs(b[i])}); }
  RealImage na = a;
  RealImage nb = b;
  if (peak > 0.0) {
    for (auto &v : na.data()) { v = std::clamp(v / peak, 0.0, 1.0); }
    for (auto &v : nb.data()) { v = std::clamp(v / peak, 0.0, 1.0); }
  }
  return {std::move(na), std::move(nb)};
}

} // namespace rtmri
