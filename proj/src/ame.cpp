#include "rtmri/ame.hpp"

#include "model.hpp"

#include <algorithm>
#include <chrono>

namespace rtmri {

void AmeProblem::validate() const
{
  if (offsets.empty() || std::find(offsets.begin(), offsets.end(), 0) == offsets.end()) {
    throw InvalidArgument("AmeProblem: window must contain offset 0");
  }
  if (frames.size() != offsets.size() || flows.size() != offsets.size()) {
    throw InvalidArgument("AmeProblem: frames and flows must be keyed by the window offsets");
  }
  if (init.offsets() != offsets) { throw InvalidArgument("AmeProblem: init coils must cover every offset"); }
  if (!psfs.empty() && psfs.size() != offsets.size()) { throw InvalidArgument("AmeProblem: one PSF per offset"); }
  int const n = init.width();
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    frames[i].validate();
    if (frames[i].coil_count() != init.coil_count()) { throw InvalidArgument("AmeProblem: coil count mismatch"); }
    if (flows[i].width() != n || flows[i].height() != n) { throw InvalidArgument("AmeProblem: flow size mismatch"); }
    if (offsets[i] == 0 && !flows[i].is_zero()) { throw InvalidArgument("AmeProblem: flow at offset 0 must be zero"); }
  }
  irgnm.validate();
  sobolev.validate();
}

struct AmeOperator::Impl {
  AmeProblem const *problem;
  KbTable table;
  SobolevWeighting weighting;
  std::vector<std::shared_ptr<PsfKernel const>> psfs;
  detail::BilinearModel model;

  static std::vector<std::shared_ptr<PsfKernel const>> make_psfs(AmeProblem const &p, KbTable const &tbl)
  {
    if (!p.psfs.empty()) { return p.psfs; }
    std::vector<std::shared_ptr<PsfKernel const>> out;
    for (auto const &f : p.frames) {
      out.push_back(std::make_shared<PsfKernel const>(build_psf(f.trajectory, tbl, p.image_size())));
    }
    return out;
  }

  static std::vector<detail::Channel> make_channels(AmeProblem const &p,
                                                    std::vector<std::shared_ptr<PsfKernel const>> const &psfs)
  {
    std::vector<detail::Channel> ch(p.offsets.size());
    for (std::size_t i = 0; i < ch.size(); ++i) {
      ch[i].trajectory = &p.frames[i].trajectory;
      ch[i].psf = psfs[i].get();
      if (!p.flows[i].is_zero()) { ch[i].warp.emplace(p.flows[i]); }
    }
    return ch;
  }

  explicit Impl(AmeProblem const &p)
    : problem(&p), table(build_kb_table(p.image_size(), p.kb)), weighting(p.image_size(), p.image_size(), p.sobolev),
      psfs(make_psfs(p, table)), model(make_channels(p, psfs), p.init.coil_count(), table, weighting)
  {
  }
};

AmeOperator::AmeOperator(AmeProblem const &problem)
{
  problem.validate();
  impl_ = std::make_unique<Impl>(problem);
}

AmeOperator::~AmeOperator() = default;
AmeOperator::AmeOperator(AmeOperator &&) noexcept = default;

WindowSamples AmeOperator::forward(Unknowns const &x) const
{
  return impl_->model.forward(impl_->model.linearize(x));
}

WindowSamples AmeOperator::jacobian(Unknowns const &x, Unknowns const &h) const
{
  if (!x.same_shape(h)) { throw InvalidArgument("ame: shape mismatch"); }
  return impl_->model.jacobian(impl_->model.linearize(x), h);
}

Unknowns AmeOperator::jacobian_adjoint(Unknowns const &x, WindowSamples const &r) const
{
  return impl_->model.adjoint(impl_->model.linearize(x), x, r);
}

WindowSamples AmeOperator::data() const
{
  WindowSamples out;
  for (auto const &f : impl_->problem->frames) {
    for (auto const &c : f.coils) { out.push_back(c); }
  }
  return out;
}

namespace ame {

WindowSamples jacobian_apply(Unknowns const &x, Unknowns const &h, AmeProblem const &problem)
{
  return AmeOperator(problem).jacobian(x, h);
}

Unknowns jacobian_adjoint_apply(Unknowns const &x, WindowSamples const &r, AmeProblem const &problem)
{
  return AmeOperator(problem).jacobian_adjoint(x, r);
}

ReconResult reconstruct_frame(AmeProblem const &problem)
{
  problem.validate();
  AmeOperator::Impl const impl(problem);
  WindowSamples data;
  for (auto const &f : problem.frames) {
    for (auto const &c : f.coils) { data.push_back(c); }
  }
  try {
    return detail::run_irgnm(impl.model, data, problem.init, problem.irgnm);
  } catch (DivergenceError const &e) {
    throw e.with_frame(problem.center_index);
  }
}

} // namespace ame

namespace {

double seconds_since(std::chrono::steady_clock::time_point start)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double frame_end_time(MultiCoilFrame const &f)
{
  return f.trajectory.spoke_times.empty() ? 0.0 : f.trajectory.spoke_times.back();
}

void check_series(std::vector<MultiCoilFrame> const &frames)
{
  if (frames.empty()) { throw InvalidArgument("pipeline: at least one frame required"); }
  for (auto const &f : frames) {
    f.validate();
    if (f.coil_count() != frames.front().coil_count()) { throw InvalidArgument("pipeline: coil count varies"); }
  }
}

std::string failure_text(int t, std::exception const &e) { return "frame " + std::to_string(t) + ": " + e.what(); }

} // namespace

SeriesResult run_nlinv_series(std::vector<MultiCoilFrame> const &frames, int image_size, PipelineConfig const &cfg)
{
  check_series(frames);
  auto const sobolev = cfg.sobolev;
  SeriesResult out;
  auto x = nlinv::initial_guess(image_size, frames.front().coil_count());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    auto const start = std::chrono::steady_clock::now();
    FrameTiming timing{static_cast<int>(t), static_cast<int>(t), 0.0, 0.0};
    try {
      auto r = nlinv::irgnm(frames[t], x, sobolev, cfg.nlinv, cfg.kb);
      x = r.unknowns;
      out.images.push_back(std::move(r.composed));
      out.residual_norms.push_back(r.residual_norm);
      out.unknowns.push_back(std::move(r.unknowns));
    } catch (std::exception const &e) {
      out.failures.push_back(failure_text(static_cast<int>(t), e));
      out.images.emplace_back(image_size, image_size);
      out.residual_norms.push_back(std::nan(""));
      out.unknowns.push_back(x);
    }
    timing.compute_seconds = seconds_since(start);
    out.timing.push_back(timing);
  }
  out.precompute = out.images;
  return out;
}

namespace {

std::vector<std::vector<MotionField>> estimate_window_flows(std::vector<ComplexImage> const &images,
                                                           WindowSpec const &window, FlowConfig const &flow)
{
  int const count = static_cast<int>(images.size());
  std::vector<std::vector<MotionField>> flows(count);
  for (int t = 0; t < count; ++t) {
    auto const clipped = window.clipped(t, count);
    for (int s : clipped.offsets()) {
      int const n = images[t].width();
      if (s == 0) {
        flows[t].push_back(MotionField::zeros(n, images[t].height()));
        continue;
      }
      auto [src, dst] = normalize_pair(magnitude(images[t]), magnitude(images[t + s]));
      flows[t].push_back(estimate_motion({std::move(src), std::move(dst), flow}));
    }
  }
  return flows;
}

} // namespace

SeriesResult run_pipeline(std::vector<MultiCoilFrame> const &frames, int image_size, PipelineConfig const &cfg)
{
  check_series(frames);
  if (cfg.ame_passes < 1) { throw InvalidArgument("pipeline: ame_passes must be >= 1"); }
  auto const sobolev = cfg.sobolev;
  int const count = static_cast<int>(frames.size());

  auto pre = run_nlinv_series(frames, image_size, cfg);

  auto const table = build_kb_table(image_size, cfg.kb);
  std::vector<std::shared_ptr<PsfKernel const>> psfs;
  for (auto const &f : frames) {
    psfs.push_back(std::make_shared<PsfKernel const>(build_psf(f.trajectory, table, image_size)));
  }

  SeriesResult out;
  out.precompute = pre.images;
  std::vector<ComplexImage> motion_source = pre.images;
  for (int pass = 0; pass < cfg.ame_passes; ++pass) {
    auto const flows = estimate_window_flows(motion_source, cfg.window, cfg.flow);
    out.images.clear();
    out.residual_norms.clear();
    out.timing.clear();
    out.unknowns.clear();
    out.failures = pre.failures;
    for (int t = 0; t < count; ++t) {
      auto const start = std::chrono::steady_clock::now();
      auto const clipped = cfg.window.clipped(t, count);
      AmeProblem problem;
      problem.center_index = t;
      problem.offsets = clipped.offsets();
      problem.flows = flows[t];
      problem.irgnm = cfg.ame;
      problem.sobolev = sobolev;
      problem.kb = cfg.kb;
      std::vector<ComplexImage> coils;
      for (int s : problem.offsets) {
        problem.frames.push_back(frames[t + s]);
        problem.psfs.push_back(psfs[t + s]);
        auto const &src = pre.unknowns[t + s];
        for (int l = 0; l < src.coil_count(); ++l) { coils.push_back(src.coil(0, l)); }
      }
      problem.init = Unknowns(pre.unknowns[t].density(), problem.offsets, frames[t].coil_count(), std::move(coils));

      int const last = t + problem.offsets.back();
      FrameTiming timing{t, last, frame_end_time(frames[last]) - frame_end_time(frames[t]), 0.0};
      if (problem.offsets.size() == 1) {
        // a window of one frame is the NLINV problem itself
        out.images.push_back(pre.images[t]);
        out.residual_norms.push_back(pre.residual_norms[t]);
        out.unknowns.push_back(pre.unknowns[t]);
        timing.compute_seconds = seconds_since(start);
        out.timing.push_back(timing);
        continue;
      }
      try {
        auto r = ame::reconstruct_frame(problem);
        out.images.push_back(std::move(r.composed));
        out.residual_norms.push_back(r.residual_norm);
        out.unknowns.push_back(std::move(r.unknowns));
      } catch (std::exception const &e) {
        out.failures.push_back(failure_text(t, e));
        out.images.emplace_back(image_size, image_size);
        out.residual_norms.push_back(std::nan(""));
        out.unknowns.push_back(problem.init);
      }
      timing.compute_seconds = seconds_since(start);
      out.timing.push_back(timing);
    }
    motion_source = out.images;
  }
  return out;
}

std::vector<ComplexImage> temporal_median(std::vector<ComplexImage> const &series, int width)
{
  if (series.empty()) { throw InvalidArgument("temporal_median: empty series"); }
  if (width < 1 || width % 2 == 0) { throw InvalidArgument("temporal_median: width must be odd and positive"); }
  for (auto const &img : series) { require_same_shape(series.front(), img, "temporal_median"); }
  int const count = static_cast<int>(series.size());
  int const half = width / 2;
  std::vector<ComplexImage> out;
  out.reserve(series.size());
  std::vector<double> values;
  for (int t = 0; t < count; ++t) {
    int const h = std::min({half, t, count - 1 - t});
    auto const &center = series[t];
    ComplexImage img(center.width(), center.height());
    for (std::size_t i = 0; i < center.size(); ++i) {
      values.clear();
      for (int k = t - h; k <= t + h; ++k) { values.push_back(std::abs(series[k][i])); }
      auto mid = values.begin() + h;
      std::nth_element(values.begin(), mid, values.end());
      double const mag = *mid;
      double const cm = std::abs(center[i]);
      img[i] = cm > 0.0 ? center[i] * (mag / cm) : cdouble(mag, 0.0);
    }
    out.push_back(std::move(img));
  }
  return out;
}

} // namespace rtmri
