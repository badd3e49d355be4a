#include "rtmri/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace rtmri {

Mask object_roi(ComplexImage const &truth, int dilation, double threshold)
{
  if (dilation < 0) { throw InvalidArgument("object_roi: dilation must be >= 0"); }
  double peak = 0.0;
  for (auto v : truth.data()) { peak = std::max(peak, std::abs(v)); }
  int const w = truth.width();
  int const h = truth.height();
  Mask out(w, h);
  if (peak == 0.0) { return out; }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (std::abs(truth(x, y)) <= threshold * peak) { continue; }
      for (int dy = -dilation; dy <= dilation; ++dy) {
        for (int dx = -dilation; dx <= dilation; ++dx) {
          int const xx = x + dx;
          int const yy = y + dy;
          if (dx * dx + dy * dy <= dilation * dilation && xx >= 0 && xx < w && yy >= 0 && yy < h) { out(xx, yy) = 1; }
        }
      }
    }
  }
  return out;
}

Mask background_roi(int width, int height, int patch)
{
  if (patch < 1 || 2 * patch > width || 2 * patch > height) { throw InvalidArgument("background_roi: invalid patch"); }
  Mask out(width, height);
  for (int y = 0; y < patch; ++y) {
    for (int x = 0; x < patch; ++x) {
      out(x, y) = 1;
      out(width - 1 - x, y) = 1;
      out(x, height - 1 - y) = 1;
      out(width - 1 - x, height - 1 - y) = 1;
    }
  }
  return out;
}

double gauge_scale(ComplexImage const &recon, ComplexImage const &truth, Mask const &mask)
{
  require_same_shape(recon, truth, "gauge_scale");
  require_same_shape(recon, mask, "gauge_scale");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < recon.size(); ++i) {
    if (!mask[i]) { continue; }
    double const r = std::abs(recon[i]);
    num += r * std::abs(truth[i]);
    den += r * r;
  }
  return den > 0.0 ? num / den : 0.0;
}

double roi_rmse(ComplexImage const &recon, ComplexImage const &truth, Mask const &mask)
{
  double const s = gauge_scale(recon, truth, mask);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < recon.size(); ++i) {
    if (!mask[i]) { continue; }
    double const d = s * std::abs(recon[i]) - std::abs(truth[i]);
    sum += d * d;
    ++count;
  }
  if (count == 0) { throw InvalidArgument("roi_rmse: empty mask"); }
  return std::sqrt(sum / count);
}

double snr(ComplexImage const &recon, Mask const &object, Mask const &background)
{
  require_same_shape(recon, object, "snr");
  require_same_shape(recon, background, "snr");
  double mean_obj = 0.0;
  std::size_t n_obj = 0;
  double mean_bg = 0.0;
  std::size_t n_bg = 0;
  for (std::size_t i = 0; i < recon.size(); ++i) {
    double const m = std::abs(recon[i]);
    if (object[i]) {
      mean_obj += m;
      ++n_obj;
    }
    if (background[i]) {
      mean_bg += m;
      ++n_bg;
    }
  }
  if (n_obj == 0 || n_bg < 2) { throw InvalidArgument("snr: empty ROI"); }
  mean_obj /= n_obj;
  mean_bg /= n_bg;
  double var = 0.0;
  for (std::size_t i = 0; i < recon.size(); ++i) {
    if (background[i]) { var += std::pow(std::abs(recon[i]) - mean_bg, 2); }
  }
  double const sd = std::sqrt(var / (n_bg - 1));
  return sd > 0.0 ? mean_obj / sd : INFINITY;
}

RealImage profile(std::vector<ComplexImage> const &series, int column)
{
  if (series.size() < 2) { throw InvalidArgument("profile: at least two frames required"); }
  int const h = series.front().height();
  if (column < 0 || column >= series.front().width()) { throw InvalidArgument("profile: column out of range"); }
  RealImage out(static_cast<int>(series.size()), h);
  for (std::size_t t = 0; t < series.size(); ++t) {
    require_same_shape(series.front(), series[t], "profile");
    for (int y = 0; y < h; ++y) { out(static_cast<int>(t), y) = std::abs(series[t](column, y)); }
  }
  return out;
}

double temporal_sharpness(RealImage const &profile)
{
  double sum = 0.0;
  for (int y = 0; y < profile.height(); ++y) {
    double best = 0.0;
    for (int t = 1; t < profile.width(); ++t) { best = std::max(best, std::abs(profile(t, y) - profile(t - 1, y))); }
    sum += best;
  }
  return sum / profile.height();
}

double series_gauge_scale(std::vector<ComplexImage> const &recon, std::vector<ComplexImage> const &truth)
{
  if (recon.size() != truth.size() || recon.empty()) { throw InvalidArgument("series_gauge_scale: length mismatch"); }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t t = 0; t < recon.size(); ++t) {
    require_same_shape(recon[t], truth[t], "series_gauge_scale");
    for (std::size_t i = 0; i < recon[t].size(); ++i) {
      double const r = std::abs(recon[t][i]);
      num += r * std::abs(truth[t][i]);
      den += r * r;
    }
  }
  return den > 0.0 ? num / den : 0.0;
}

namespace {

Mask bright_roi(ComplexImage const &img, double fraction)
{
  double peak = 0.0;
  for (auto v : img.data()) { peak = std::max(peak, std::abs(v)); }
  Mask out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) { out[i] = peak > 0.0 && std::abs(img[i]) >= fraction * peak; }
  return out;
}

} // namespace

MetricsReport evaluate_series(std::vector<ComplexImage> const &recon, std::vector<ComplexImage> const &truth,
                              MetricsOptions const &options)
{
  if (recon.empty()) { throw InvalidArgument("evaluate_series: empty series"); }
  bool const has_truth = !truth.empty();
  if (has_truth && truth.size() != recon.size()) { throw InvalidArgument("evaluate_series: truth length mismatch"); }
  int const w = recon.front().width();
  int const h = recon.front().height();
  if (options.object_mask && (options.object_mask->width() != w || options.object_mask->height() != h)) {
    throw InvalidArgument("evaluate_series: mask size mismatch");
  }
  auto const background = background_roi(w, h, options.background_patch);

  MetricsReport out;
  for (std::size_t t = 0; t < recon.size(); ++t) {
    require_same_shape(recon.front(), recon[t], "evaluate_series");
    Mask const roi = options.object_mask ? *options.object_mask
                     : has_truth         ? object_roi(truth[t])
                                         : bright_roi(recon[t], 0.25);
    if (has_truth) { out.roi_rmse.push_back(roi_rmse(recon[t], truth[t], roi)); }
    out.snr.push_back(snr(recon[t], roi, background));
  }

  if (has_truth) {
    out.profile_scale = series_gauge_scale(recon, truth);
  } else {
    double peak = 0.0;
    for (auto const &img : recon) {
      for (auto v : img.data()) { peak = std::max(peak, std::abs(v)); }
    }
    out.profile_scale = peak > 0.0 ? 1.0 / peak : 1.0;
  }
  if (recon.size() >= 2) {
    out.profile = profile(recon, options.profile_column);
    for (auto &v : out.profile.data()) { v *= out.profile_scale; }
    out.temporal_sharpness = temporal_sharpness(out.profile);
  }
  return out;
}

} // namespace rtmri
