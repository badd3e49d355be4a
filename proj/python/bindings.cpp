#include "rtmri/app.hpp"
#include "rtmri/metrics.hpp"
#include "rtmri/pca.hpp"

#include <json.hpp>
#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

namespace py = pybind11;
using namespace rtmri;

namespace {

using CArray = py::array_t<cdouble, py::array::c_style | py::array::forcecast>;
using RArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

template <typename T>
Image<T> to_image(py::array_t<T, py::array::c_style | py::array::forcecast> const &a)
{
  if (a.ndim() != 2) { throw InvalidArgument("expected a 2-D array"); }
  int const h = static_cast<int>(a.shape(0));
  int const w = static_cast<int>(a.shape(1));
  std::vector<T> data(a.data(), a.data() + a.size());
  return Image<T>(w, h, std::move(data));
}

template <typename T>
py::array_t<T> from_image(Image<T> const &img)
{
  py::array_t<T> out({img.height(), img.width()});
  std::memcpy(out.mutable_data(), img.data().data(), img.size() * sizeof(T));
  return out;
}

template <typename T>
py::array_t<T> stack(std::vector<Image<T>> const &series)
{
  if (series.empty()) { return py::array_t<T>(std::vector<py::ssize_t>{0, 0, 0}); }
  int const h = series.front().height();
  int const w = series.front().width();
  py::array_t<T> out({static_cast<py::ssize_t>(series.size()), static_cast<py::ssize_t>(h), static_cast<py::ssize_t>(w)});
  T *dst = out.mutable_data();
  for (auto const &img : series) {
    std::memcpy(dst, img.data().data(), img.size() * sizeof(T));
    dst += img.size();
  }
  return out;
}

template <typename T>
std::vector<Image<T>> unstack(py::array_t<T, py::array::c_style | py::array::forcecast> const &a)
{
  if (a.ndim() != 3) { throw InvalidArgument("expected a 3-D array (frames, height, width)"); }
  int const h = static_cast<int>(a.shape(1));
  int const w = static_cast<int>(a.shape(2));
  std::vector<Image<T>> out;
  T const *src = a.data();
  for (py::ssize_t t = 0; t < a.shape(0); ++t) {
    out.emplace_back(w, h, std::vector<T>(src, src + static_cast<std::size_t>(w) * h));
    src += static_cast<std::size_t>(w) * h;
  }
  return out;
}

RadialTrajectory to_trajectory(RArray const &k)
{
  if (k.ndim() != 2 || k.shape(1) != 2) { throw InvalidArgument("trajectory must have shape (samples, 2)"); }
  RadialTrajectory t;
  auto const v = k.unchecked<2>();
  for (py::ssize_t j = 0; j < v.shape(0); ++j) { t.samples.push_back({v(j, 0), v(j, 1)}); }
  t.spokes = 1;
  t.samples_per_spoke = static_cast<int>(t.samples.size());
  t.spoke_times = {0.0};
  return t;
}

py::array_t<cdouble> sample_array(SampleVector const &y)
{
  py::array_t<cdouble> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(y.size())});
  std::memcpy(out.mutable_data(), y.data(), y.size() * sizeof(cdouble));
  return out;
}

py::array_t<double> trajectory_array(RadialTrajectory const &t)
{
  py::array_t<double> out({static_cast<py::ssize_t>(t.size()), py::ssize_t{2}});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t j = 0; j < t.size(); ++j) {
    m(j, 0) = t.samples[j].kx;
    m(j, 1) = t.samples[j].ky;
  }
  return out;
}

py::array_t<cdouble> coil_array(MultiCoilFrame const &f)
{
  py::array_t<cdouble> out({static_cast<py::ssize_t>(f.coil_count()), static_cast<py::ssize_t>(f.trajectory.size())});
  cdouble *dst = out.mutable_data();
  for (auto const &c : f.coils) {
    std::memcpy(dst, c.data(), c.size() * sizeof(cdouble));
    dst += c.size();
  }
  return out;
}

RunConfig config_from(py::object const &cfg)
{
  if (cfg.is_none()) { return RunConfig{}; }
  if (py::isinstance<py::str>(cfg)) { return parse_config(cfg.cast<std::string>()); }
  auto const dumps = py::module_::import("json").attr("dumps");
  return parse_config(dumps(cfg).cast<std::string>());
}

KbParams kb_params(int width, double beta, double oversampling) { return {width, beta, oversampling}; }

py::dict manifest_dict(DatasetManifest const &m)
{
  py::dict d;
  d["version"] = m.version;
  d["frames"] = m.frames;
  d["coils"] = m.coils;
  d["spokes_per_frame"] = m.spokes_per_frame;
  d["samples_per_spoke"] = m.samples_per_spoke;
  d["base_resolution"] = m.base_resolution;
  d["repetition_time_s"] = m.repetition_time_s;
  d["interleaves"] = m.interleaves;
  d["normalized"] = m.normalized;
  d["physics"] = m.physics;
  return d;
}

} // namespace

PYBIND11_MODULE(_rtmri, m)
{
  m.doc() = "Real-time radial MRI reconstruction: NLINV, NLINV with temporal median, aggregated motion estimation";

  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  auto invalid = py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", invalid.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("manifest", [](Dataset const &d) { return manifest_dict(d.manifest); })
      .def_property_readonly("frame_count", [](Dataset const &d) { return d.frames.size(); })
      .def("samples", [](Dataset const &d, std::size_t t) { return coil_array(d.frames.at(t)); }, py::arg("frame"),
           "Coil samples of one frame, shape (coils, samples).")
      .def("trajectory", [](Dataset const &d, std::size_t t) { return trajectory_array(d.frames.at(t).trajectory); },
           py::arg("frame"), "k-space positions of one frame in cycles per pixel, shape (samples, 2).")
      .def("spoke_times", [](Dataset const &d, std::size_t t) { return d.frames.at(t).trajectory.spoke_times; },
           py::arg("frame"))
      .def_property_readonly("truth", [](Dataset const &d) { return stack(d.truth); });

  m.def("default_config", [] { return dump_config(RunConfig{}); }, "Default configuration as JSON text.");
  m.def(
      "simulate", [](py::object const &cfg) { return simulate_dataset(config_from(cfg)); },
      py::arg("config") = py::none(), "Simulate a dataset from a config (JSON text, dict or None).");
  m.def("write_dataset", &write_dataset, py::arg("path"), py::arg("dataset"));
  m.def("read_dataset", &read_dataset, py::arg("path"));

  m.def(
      "reconstruct",
      [](Dataset const &ds, py::object const &cfg) {
        auto const run_cfg = config_from(cfg);
        ReconstructionOutput out;
        {
          py::gil_scoped_release release;
          out = reconstruct_dataset(ds, run_cfg);
        }
        py::dict d;
        d["images"] = stack(out.images);
        d["failures"] = out.failures;
        d["virtual_channels"] = out.virtual_channels;
        d["retained_energy"] = out.retained_energy;
        d["normalization_scale"] = out.normalization_scale;
        return d;
      },
      py::arg("dataset"), py::arg("config") = py::none(),
      "Normalize, compress channels and run the configured method. Returns images (frames, n, n).");

  m.def(
      "pca_energies",
      [](Dataset const &ds, int virtual_channels) {
        auto const c = pca_compress(ds.frames, virtual_channels);
        py::dict d;
        d["energies"] = c.energies;
        d["total_energy"] = c.total_energy;
        d["retained_fraction"] = c.retained_fraction;
        return d;
      },
      py::arg("dataset"), py::arg("virtual_channels") = 10);

  m.def(
      "nufft_forward",
      [](CArray const &img, RArray const &traj, int kernel_width, double beta, double oversampling) {
        auto const image = to_image(img);
        if (image.width() != image.height()) { throw InvalidArgument("nufft_forward: image must be square"); }
        auto const tbl = build_kb_table(image.width(), kb_params(kernel_width, beta, oversampling));
        return sample_array(nufft_forward(image, to_trajectory(traj), tbl));
      },
      py::arg("image"), py::arg("trajectory"), py::arg("kernel_width") = 6, py::arg("beta") = 13.8551,
      py::arg("oversampling") = 1.5);
  m.def(
      "nufft_adjoint",
      [](CArray const &samples, RArray const &traj, int size, int kernel_width, double beta, double oversampling) {
        auto const tbl = build_kb_table(size, kb_params(kernel_width, beta, oversampling));
        SampleVector y(samples.data(), samples.data() + samples.size());
        return from_image(nufft_adjoint(y, to_trajectory(traj), tbl));
      },
      py::arg("samples"), py::arg("trajectory"), py::arg("size"), py::arg("kernel_width") = 6,
      py::arg("beta") = 13.8551, py::arg("oversampling") = 1.5);

  m.def(
      "estimate_motion",
      [](RArray const &src, RArray const &dst, double lambda, double mu) {
        FlowConfig cfg;
        cfg.lambda = lambda;
        cfg.mu = mu;
        auto const f = estimate_motion({to_image(src), to_image(dst), cfg});
        return py::make_tuple(from_image(f.ux), from_image(f.uy));
      },
      py::arg("src"), py::arg("dst"), py::arg("lambda_") = 0.02, py::arg("mu") = 1.0,
      "TV-L1 flow (ux, uy) such that src(x + u(x)) matches dst; images in [0, 1].");
  m.def(
      "warp",
      [](CArray const &img, RArray const &ux, RArray const &uy) {
        return from_image(warp_bicubic(to_image(img), MotionField(to_image(ux), to_image(uy))));
      },
      py::arg("image"), py::arg("ux"), py::arg("uy"));

  m.def(
      "temporal_median",
      [](CArray const &series, int width) { return stack(temporal_median(unstack(series), width)); },
      py::arg("series"), py::arg("width") = 5);

  m.def(
      "metrics",
      [](CArray const &recon, std::optional<CArray> const &truth, int profile_column) {
        auto const r = unstack(recon);
        std::vector<ComplexImage> t;
        if (truth) { t = unstack(*truth); }
        MetricsOptions opts;
        opts.profile_column = profile_column >= 0 ? profile_column : (r.empty() ? 0 : r.front().width() / 2);
        auto const rep = evaluate_series(r, t, opts);
        py::dict d;
        d["roi_rmse"] = rep.roi_rmse;
        d["snr"] = rep.snr;
        d["profile"] = from_image(rep.profile);
        d["profile_scale"] = rep.profile_scale;
        d["temporal_sharpness"] = rep.temporal_sharpness;
        return d;
      },
      py::arg("recon"), py::arg("truth") = py::none(), py::arg("profile_column") = -1,
      "ROI RMSE (with truth), SNR, profile (rows x frames) and temporal sharpness.");
}
