#include "rtmri/nlinv.hpp"

#include "model.hpp"

#include <cmath>

namespace rtmri {

void IrgnmConfig::validate() const
{
  if (!(alpha0 > 0.0)) { throw InvalidArgument("IrgnmConfig: alpha0 must be positive"); }
  if (!(q > 0.0 && q < 1.0)) { throw InvalidArgument("IrgnmConfig: q must lie in (0, 1)"); }
  if (newton_steps < 1) { throw InvalidArgument("IrgnmConfig: at least one Newton step required"); }
  if (cg_max_iter < 1 || !(cg_tolerance > 0.0)) { throw InvalidArgument("IrgnmConfig: invalid CG settings"); }
}

double IrgnmConfig::alpha(int step) const { return alpha0 * std::pow(q, step); }

std::vector<double> IrgnmConfig::alpha_schedule() const
{
  std::vector<double> out;
  for (int n = 0; n < newton_steps; ++n) { out.push_back(alpha(n)); }
  return out;
}

DivergenceError::DivergenceError(std::string const &what, int frame_index)
  : std::runtime_error(frame_index >= 0 ? "frame " + std::to_string(frame_index) + ": " + what : what),
    message_(what), frame_index_(frame_index)
{
}

DivergenceError DivergenceError::with_frame(int frame_index) const { return DivergenceError(message_, frame_index); }

CgResult cg_normal_solve(Unknowns const &rhs, double alpha, NormalMap const &normal, int max_iter, double tolerance)
{
  if (!(alpha > 0.0)) { throw InvalidArgument("cg_normal_solve: alpha must be positive"); }
  CgResult out{rhs.zeros_like(), 0, 0.0};
  double const rhs_norm = norm(rhs);
  if (rhs_norm == 0.0) { return out; }
  if (!std::isfinite(rhs_norm)) { throw DivergenceError("cg_normal_solve: non-finite right-hand side"); }

  Unknowns r = rhs;
  Unknowns p = rhs;
  double rr = rhs_norm * rhs_norm;
  for (int it = 0; it < max_iter; ++it) {
    Unknowns ap = normal(p);
    ap.axpy(alpha, p);
    double const pap = inner_product(p, ap).real();
    if (!std::isfinite(pap)) { throw DivergenceError("cg_normal_solve: non-finite curvature"); }
    if (pap <= 0.0) { break; }
    double const step = rr / pap;
    out.solution.axpy(step, p);
    r.axpy(-step, ap);
    double const rr_next = inner_product(r, r).real();
    out.iterations = it + 1;
    out.relative_residual = std::sqrt(rr_next) / rhs_norm;
    if (!std::isfinite(rr_next)) { throw DivergenceError("cg_normal_solve: non-finite residual"); }
    if (out.relative_residual <= tolerance) { break; }
    p *= rr_next / rr;
    p += r;
    rr = rr_next;
  }
  return out;
}

NlinvOperator::NlinvOperator(MultiCoilFrame const &frame, int image_size, SobolevConfig const &sobolev,
                             KbParams const &kb)
  : frame_(&frame), table_(build_kb_table(image_size, kb)), psf_(build_psf(frame.trajectory, table_, image_size)),
    weighting_(image_size, image_size, sobolev)
{
  frame.validate();
}

namespace {

detail::BilinearModel single_frame_model(NlinvOperator const &op)
{
  std::vector<detail::Channel> ch(1);
  ch[0].trajectory = &op.frame().trajectory;
  ch[0].psf = &op.psf();
  return detail::BilinearModel(std::move(ch), op.frame().coil_count(), op.table(), op.sobolev());
}

void check_single_offset(Unknowns const &x)
{
  if (x.offsets() != std::vector<int>{0}) { throw InvalidArgument("nlinv: unknowns must hold offset 0 only"); }
}

} // namespace

PerCoilSamples NlinvOperator::forward(Unknowns const &x) const
{
  check_single_offset(x);
  auto const model = single_frame_model(*this);
  return model.forward(model.linearize(x));
}

PerCoilSamples NlinvOperator::jacobian(Unknowns const &x, Unknowns const &h) const
{
  check_single_offset(x);
  if (!x.same_shape(h)) { throw InvalidArgument("nlinv: shape mismatch"); }
  auto const model = single_frame_model(*this);
  return model.jacobian(model.linearize(x), h);
}

Unknowns NlinvOperator::jacobian_adjoint(Unknowns const &x, PerCoilSamples const &r) const
{
  check_single_offset(x);
  auto const model = single_frame_model(*this);
  for (std::size_t l = 0; l < r.size(); ++l) {
    if (r[l].size() != frame_->trajectory.size()) { throw InvalidArgument("nlinv: residual length mismatch"); }
  }
  return model.adjoint(model.linearize(x), x, r);
}

namespace nlinv {

PerCoilSamples forward(Unknowns const &x, MultiCoilFrame const &frame, SobolevConfig const &sobolev)
{
  return NlinvOperator(frame, x.width(), sobolev).forward(x);
}

PerCoilSamples jacobian_apply(Unknowns const &x, Unknowns const &h, MultiCoilFrame const &frame,
                              SobolevConfig const &sobolev)
{
  return NlinvOperator(frame, x.width(), sobolev).jacobian(x, h);
}

Unknowns jacobian_adjoint_apply(Unknowns const &x, PerCoilSamples const &r, MultiCoilFrame const &frame,
                                SobolevConfig const &sobolev)
{
  return NlinvOperator(frame, x.width(), sobolev).jacobian_adjoint(x, r);
}

ReconResult irgnm(MultiCoilFrame const &frame, Unknowns const &init, SobolevConfig const &sobolev,
                  IrgnmConfig const &cfg, KbParams const &kb)
{
  check_single_offset(init);
  if (init.coil_count() != frame.coil_count()) { throw InvalidArgument("nlinv: coil count mismatch"); }
  NlinvOperator const op(frame, init.width(), sobolev, kb);
  auto const model = single_frame_model(op);
  try {
    return detail::run_irgnm(model, frame.coils, init, cfg);
  } catch (DivergenceError const &e) {
    throw e.with_frame(frame.frame_index);
  }
}

Unknowns initial_guess(int image_size, int coil_count)
{
  auto x = Unknowns::zeros(image_size, image_size, {0}, coil_count);
  for (auto &v : x.density().data()) { v = 1.0; }
  return x;
}

} // namespace nlinv

ComplexImage compose_image(Unknowns const &x, SobolevConfig const &sobolev)
{
  SobolevWeighting const w(x.width(), x.height(), sobolev);
  std::size_t const center = x.offset_index(0);
  std::vector<double> rss(x.density().size());
  for (int l = 0; l < x.coil_count(); ++l) {
    auto const wc = w.apply(x.coil(center, l));
    for (std::size_t i = 0; i < rss.size(); ++i) { rss[i] += std::norm(wc[i]); }
  }
  ComplexImage out(x.width(), x.height());
  for (std::size_t i = 0; i < rss.size(); ++i) { out[i] = x.density()[i] * std::sqrt(rss[i]); }
  return out;
}

} // namespace rtmri
