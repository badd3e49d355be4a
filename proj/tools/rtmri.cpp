#include "rtmri/app.hpp"
#include "rtmri/metrics.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>

namespace fs = std::filesystem;
using namespace rtmri;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_frames = 2;

struct Options {
  std::string config;
  std::string method;
  std::string window;
  int newton_steps = 0;
  int virtual_channels = 0;
  long long seed = -1;
  int profile_column = -1;
  std::string out;
  std::string dataset;
  std::string series;
  std::string truth;
  std::string roi;
};

RunConfig load(Options const &o)
{
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (!o.method.empty()) { cfg.method = parse_method(o.method); }
  if (!o.window.empty()) {
    try {
      cfg.pipeline.window = WindowSpec::parse(o.window);
    } catch (InvalidArgument const &e) {
      throw ConfigError(std::string("--window: ") + e.what());
    }
  }
  if (o.newton_steps > 0) {
    cfg.pipeline.nlinv.newton_steps = o.newton_steps;
    cfg.pipeline.ame.newton_steps = o.newton_steps;
  }
  if (o.virtual_channels > 0) { cfg.virtual_channels = o.virtual_channels; }
  if (o.seed >= 0) { cfg.acquisition.seed = static_cast<std::uint64_t>(o.seed); }
  cfg.validate();
  return cfg;
}

int run_simulate(Options const &o)
{
  auto const cfg = load(o);
  auto const dataset = simulate_dataset(cfg);
  write_dataset(o.out, dataset);
  write_file_atomic(fs::path(o.out) / "config.json", dump_config(cfg));
  std::cout << "wrote " << dataset.manifest.frames << " frames x " << dataset.manifest.coils << " coils to " << o.out
            << "\n";
  return exit_ok;
}

int run_reconstruct(Options const &o)
{
  auto const cfg = load(o);
  auto const dataset = read_dataset(o.dataset);
  auto const result = reconstruct_dataset(dataset, cfg);
  write_series(o.out, magnitudes(result.images), method_name(cfg.method));

  nlohmann::json log = {{"method", method_name(cfg.method)},
                        {"virtual_channels", result.virtual_channels},
                        {"retained_energy", result.retained_energy},
                        {"normalization_scale", result.normalization_scale},
                        {"failures", result.failures}};
  nlohmann::json timing = nlohmann::json::array();
  for (auto const &t : result.timing) {
    timing.push_back({{"frame", t.frame}, {"waits_for_frame", t.waits_for_frame}, {"latency_seconds", t.latency_seconds}});
  }
  log["timing"] = timing;
  write_file_atomic(fs::path(o.out) / "run.json", log.dump(2) + "\n");
  write_file_atomic(fs::path(o.out) / "config.json", dump_config(cfg));

  for (auto const &f : result.failures) { std::cerr << "failed: " << f << "\n"; }
  std::cout << "wrote " << result.images.size() << " " << method_name(cfg.method) << " images to " << o.out << "\n";
  return result.failures.empty() ? exit_ok : exit_frames;
}

std::vector<ComplexImage> as_complex(std::vector<RealImage> const &series)
{
  std::vector<ComplexImage> out;
  for (auto const &img : series) {
    ComplexImage c(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) { c[i] = img[i]; }
    out.push_back(std::move(c));
  }
  return out;
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

int run_metrics(Options const &o)
{
  auto const recon = as_complex(read_series(o.series));
  std::vector<ComplexImage> truth;
  if (!o.truth.empty()) { truth = as_complex(read_series(o.truth)); }
  MetricsOptions opts;
  int const w = recon.front().width();
  opts.profile_column = o.profile_column >= 0 ? o.profile_column : w / 2;
  if (!o.roi.empty()) { opts.object_mask = read_mask(o.roi, w, recon.front().height()); }
  auto const report = evaluate_series(recon, truth, opts);

  nlohmann::json j;
  j["roi_rmse"] = nlohmann::json::array();
  for (double v : report.roi_rmse) { j["roi_rmse"].push_back(finite_or_null(v)); }
  j["snr"] = nlohmann::json::array();
  for (double v : report.snr) { j["snr"].push_back(finite_or_null(v)); }
  j["profile_column"] = opts.profile_column;
  j["profile_scale"] = report.profile_scale;
  j["temporal_sharpness"] = report.temporal_sharpness;
  nlohmann::json rows = nlohmann::json::array();
  for (int y = 0; y < report.profile.height(); ++y) {
    nlohmann::json row = nlohmann::json::array();
    for (int t = 0; t < report.profile.width(); ++t) { row.push_back(report.profile(t, y)); }
    rows.push_back(row);
  }
  j["profile"] = rows;
  if (truth.empty()) { std::cerr << "no truth given: roi_rmse skipped\n"; }

  auto const text = j.dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(o.out, text);
    if (!report.profile.empty()) {
      double peak = 0.0;
      for (double v : report.profile.data()) { peak = std::max(peak, v); }
      write_file_atomic(fs::path(o.out).replace_extension(".png"), encode_png(report.profile, peak));
    }
  }
  return exit_ok;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Real-time radial MRI reconstruction: NLINV, NLINV-MED and aggregated motion estimation"};
  app.require_subcommand(1);
  Options o;

  auto *sim = app.add_subcommand("simulate", "Simulate a rotating-tube phantom dataset");
  sim->add_option("--config", o.config, "JSON configuration")->check(CLI::ExistingFile);
  sim->add_option("--seed", o.seed, "Noise seed");
  sim->add_option("--out", o.out, "Dataset directory")->required();

  auto *rec = app.add_subcommand("reconstruct", "Reconstruct an image series from a dataset");
  rec->add_option("dataset", o.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  rec->add_option("--config", o.config, "JSON configuration")->check(CLI::ExistingFile);
  rec->add_option("--method", o.method, "nlinv | nlinv-med | ame");
  rec->add_option("--window", o.window, "Window offsets, e.g. \"-2,-1,0,1,2\"");
  rec->add_option("--newton-steps", o.newton_steps, "Newton steps for every solver")->check(CLI::PositiveNumber);
  rec->add_option("--virtual-channels", o.virtual_channels, "PCA channel count")->check(CLI::PositiveNumber);
  rec->add_option("--out", o.out, "Output series directory")->required();

  auto *met = app.add_subcommand("metrics", "ROI RMSE, SNR and temporal profile of a series");
  met->add_option("series", o.series, "Series directory")->required()->check(CLI::ExistingDirectory);
  met->add_option("--truth", o.truth, "Truth series directory")->check(CLI::ExistingDirectory);
  met->add_option("--roi", o.roi, "Object mask, width*height bytes")->check(CLI::ExistingFile);
  met->add_option("--profile-column", o.profile_column, "Profile column (default: center)");
  met->add_option("--out", o.out, "Report JSON path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const &e) {
    return app.exit(e) == 0 ? exit_ok : exit_config;
  }

  try {
    if (*sim) { return run_simulate(o); }
    if (*rec) { return run_reconstruct(o); }
    return run_metrics(o);
  } catch (ConfigError const &e) {
    std::cerr << "config error: " << e.what() << "\n";
  } catch (InvalidArgument const &e) {
    std::cerr << "invalid input: " << e.what() << "\n";
  } catch (IoError const &e) {
    std::cerr << "io error: " << e.what() << "\n";
  } catch (std::exception const &e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return exit_config;
}
