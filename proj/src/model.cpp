#include "model.hpp"

#include <cmath>

namespace rtmri::detail {

BilinearModel::BilinearModel(std::vector<Channel> channels, int coil_count, KbTable const &table,
                             SobolevWeighting const &weighting)
  : channels_(std::move(channels)), coil_count_(coil_count), table_(&table), weighting_(&weighting)
{
  if (channels_.empty()) { throw InvalidArgument("model: at least one channel required"); }
  if (coil_count_ < 1) { throw InvalidArgument("model: at least one coil required"); }
}

void BilinearModel::check(Unknowns const &x) const
{
  if (x.offsets().size() != channels_.size() || x.coil_count() != coil_count_) {
    throw InvalidArgument("model: unknowns do not match the operator window");
  }
  if (x.width() != table_->image_size() || x.height() != table_->image_size()) {
    throw InvalidArgument("model: unknowns do not match the image size");
  }
}

ComplexImage BilinearModel::warp(std::size_t c, ComplexImage const &img) const
{
  auto const &w = channels_[c].warp;
  return w ? w->apply(img) : img;
}

ComplexImage BilinearModel::warp_transpose(std::size_t c, ComplexImage const &img) const
{
  auto const &w = channels_[c].warp;
  return w ? w->adjoint(img) : img;
}

BilinearModel::Linearization BilinearModel::linearize(Unknowns const &x) const
{
  check(x);
  Linearization lin;
  lin.density = x.density();
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    lin.warped_density.push_back(warp(c, x.density()));
    for (int l = 0; l < coil_count_; ++l) { lin.weighted_coils.push_back(weighting_->apply(x.coil(c, l))); }
  }
  return lin;
}

std::vector<SampleVector> BilinearModel::forward(Linearization const &lin) const
{
  std::vector<SampleVector> out;
  out.reserve(channels_.size() * coil_count_);
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    for (int l = 0; l < coil_count_; ++l) {
      auto const img = multiply(lin.warped_density[c], lin.weighted_coils[c * coil_count_ + l]);
      out.push_back(nufft_forward(img, *channels_[c].trajectory, *table_));
    }
  }
  return out;
}

std::vector<SampleVector> BilinearModel::jacobian(Linearization const &lin, Unknowns const &h) const
{
  check(h);
  std::vector<SampleVector> out;
  out.reserve(channels_.size() * coil_count_);
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    auto const warped_h = warp(c, h.density());
    for (int l = 0; l < coil_count_; ++l) {
      auto z = multiply(warped_h, lin.weighted_coils[c * coil_count_ + l]);
      add_in_place(z, multiply(lin.warped_density[c], weighting_->apply(h.coil(c, l))));
      out.push_back(nufft_forward(z, *channels_[c].trajectory, *table_));
    }
  }
  return out;
}

Unknowns BilinearModel::adjoint(Linearization const &lin, Unknowns const &shape, std::vector<SampleVector> const &r) const
{
  check(shape);
  if (r.size() != channels_.size() * coil_count_) { throw InvalidArgument("model: residual count mismatch"); }
  auto out = shape.zeros_like();
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    ComplexImage acc(out.width(), out.height());
    for (int l = 0; l < coil_count_; ++l) {
      auto const g = nufft_adjoint(r[c * coil_count_ + l], *channels_[c].trajectory, *table_);
      add_in_place(acc, multiply_conj(lin.weighted_coils[c * coil_count_ + l], g));
      out.coil(c, l) = weighting_->adjoint(multiply_conj(lin.warped_density[c], g));
    }
    add_in_place(out.density(), warp_transpose(c, acc));
  }
  return out;
}

Unknowns BilinearModel::normal(Linearization const &lin, Unknowns const &h) const
{
  check(h);
  auto out = h.zeros_like();
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    auto const warped_h = warp(c, h.density());
    ComplexImage acc(out.width(), out.height());
    for (int l = 0; l < coil_count_; ++l) {
      auto const &wc = lin.weighted_coils[c * coil_count_ + l];
      auto z = multiply(warped_h, wc);
      add_in_place(z, multiply(lin.warped_density[c], weighting_->apply(h.coil(c, l))));
      auto const g = normal_apply(z, *channels_[c].psf);
      add_in_place(acc, multiply_conj(wc, g));
      out.coil(c, l) = weighting_->adjoint(multiply_conj(lin.warped_density[c], g));
    }
    add_in_place(out.density(), warp_transpose(c, acc));
  }
  return out;
}

double residual_norm(std::vector<SampleVector> const &data, std::vector<SampleVector> const &pred)
{
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data[i].size(); ++j) { s += std::norm(data[i][j] - pred[i][j]); }
  }
  return std::sqrt(s);
}

namespace {
std::vector<SampleVector> subtract(std::vector<SampleVector> const &a, std::vector<SampleVector> const &b)
{
  auto out = a;
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = 0; j < out[i].size(); ++j) { out[i][j] -= b[i][j]; }
  }
  return out;
}
} // namespace

ReconResult run_irgnm(BilinearModel const &model, std::vector<SampleVector> const &data, Unknowns const &init,
                      IrgnmConfig const &cfg)
{
  cfg.validate();
  ReconResult result;
  Unknowns x = init;
  auto lin = model.linearize(x);
  auto pred = model.forward(lin);
  for (int n = 0; n < cfg.newton_steps; ++n) {
    double const alpha = cfg.alpha(n);
    result.alphas.push_back(alpha);
    auto rhs = model.adjoint(lin, x, subtract(data, pred));
    rhs.axpy(-alpha, x - init);
    if (!rhs.all_finite()) { throw DivergenceError("non-finite right-hand side at Newton step " + std::to_string(n)); }

    auto const cg = cg_normal_solve(
      rhs, alpha, [&](Unknowns const &h) { return model.normal(lin, h); }, cfg.cg_max_iter, cfg.cg_tolerance * alpha);
    result.cg_iterations += cg.iterations;
    x += cg.solution;
    if (!x.all_finite()) { throw DivergenceError("non-finite iterate after Newton step " + std::to_string(n)); }

    lin = model.linearize(x);
    pred = model.forward(lin);
    result.residual_history.push_back(residual_norm(data, pred));
  }
  result.residual_norm = cfg.newton_steps > 0 ? result.residual_history.back() : residual_norm(data, pred);

  // offset 0 carries the displayed coil maps
  std::size_t const center = x.offset_index(0);
  ComplexImage rss(x.width(), x.height());
  for (int l = 0; l < model.coil_count(); ++l) {
    auto const &wc = lin.weighted_coils[center * model.coil_count() + l];
    for (std::size_t i = 0; i < rss.size(); ++i) { rss[i] += std::norm(wc[i]); }
  }
  result.composed = ComplexImage(x.width(), x.height());
  for (std::size_t i = 0; i < rss.size(); ++i) { result.composed[i] = x.density()[i] * std::sqrt(rss[i].real()); }
  result.unknowns = std::move(x);
  return result;
}

} // namespace rtmri::detail
