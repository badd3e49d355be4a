#pragma once

#include "rtmri/core.hpp"
#include "rtmri/frame.hpp"

#include <functional>
#include <stdexcept>

namespace rtmri {

struct IrgnmConfig {
  double alpha0 = 1.0;
  double q = 1.0 / 3.0;
  int newton_steps = 6;
  int cg_max_iter = 200;
  /// CG stops at relative residual <= cg_tolerance * alpha_n.
  double cg_tolerance = 1e-2;

  void validate() const;
  double alpha(int step) const;
  std::vector<double> alpha_schedule() const;
};

/// Raised when an iterate becomes non-finite.
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(std::string const &what, int frame_index = -1);
  int frame_index() const { return frame_index_; }
  DivergenceError with_frame(int frame_index) const;

private:
  std::string message_;
  int frame_index_;
};

struct ReconResult {
  Unknowns unknowns;               // preconditioned coordinates
  ComplexImage composed;           // rho * rss(W c)
  double residual_norm = 0.0;      // ||y - G(x)|| at the returned iterate
  std::vector<double> residual_history; // residual after each Newton step
  std::vector<double> alphas;
  int cg_iterations = 0;
};

using PerCoilSamples = std::vector<SampleVector>;

/// Shared inputs of the single-frame operators; builds the gridding table
/// and PSF once.
class NlinvOperator {
public:
  NlinvOperator(MultiCoilFrame const &frame, int image_size, SobolevConfig const &sobolev, KbParams const &kb = {});

  PerCoilSamples forward(Unknowns const &x) const;
  PerCoilSamples jacobian(Unknowns const &x, Unknowns const &h) const;
  Unknowns jacobian_adjoint(Unknowns const &x, PerCoilSamples const &r) const;

  MultiCoilFrame const &frame() const { return *frame_; }
  KbTable const &table() const { return table_; }
  PsfKernel const &psf() const { return psf_; }
  SobolevWeighting const &sobolev() const { return weighting_; }

private:
  MultiCoilFrame const *frame_;
  KbTable table_;
  PsfKernel psf_;
  SobolevWeighting weighting_;
};

namespace nlinv {

/// G(x)_l = S F (rho * W c_l) for every coil of `frame`.
PerCoilSamples forward(Unknowns const &x, MultiCoilFrame const &frame, SobolevConfig const &sobolev);
/// G'(x) h, the product-rule linearization.
PerCoilSamples jacobian_apply(Unknowns const &x, Unknowns const &h, MultiCoilFrame const &frame,
                              SobolevConfig const &sobolev);
/// G'(x)* r.
Unknowns jacobian_adjoint_apply(Unknowns const &x, PerCoilSamples const &r, MultiCoilFrame const &frame,
                                SobolevConfig const &sobolev);

/// Single-frame IRGNM from `init`; init doubles as the Tikhonov anchor.
ReconResult irgnm(MultiCoilFrame const &frame, Unknowns const &init, SobolevConfig const &sobolev,
                  IrgnmConfig const &cfg, KbParams const &kb = {});

/// Initial guess rho = 1, c = 0.
Unknowns initial_guess(int image_size, int coil_count);

} // namespace nlinv

struct CgResult {
  Unknowns solution;
  int iterations = 0;
  double relative_residual = 0.0;
};

using NormalMap = std::function<Unknowns(Unknowns const &)>;

/// Solve (N + alpha I) h = rhs by conjugate gradients from h = 0, where N is
/// self-adjoint positive semi-definite.
CgResult cg_normal_solve(Unknowns const &rhs, double alpha, NormalMap const &normal, int max_iter,
                         double tolerance);

/// rho * sqrt(sum_l |W c_{0,l}|^2).
ComplexImage compose_image(Unknowns const &x, SobolevConfig const &sobolev);

} // namespace rtmri
