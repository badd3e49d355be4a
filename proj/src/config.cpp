#include "rtmri/config.hpp"

#include "rtmri/io.hpp"

#include <json.hpp>

#include <initializer_list>

namespace rtmri {

using nlohmann::json;

namespace {

void only_keys(json const &j, std::string const &section, std::initializer_list<char const *> keys)
{
  if (!j.is_object()) { throw ConfigError(section + ": expected an object"); }
  for (auto const &[key, value] : j.items()) {
    bool known = false;
    for (auto const *k : keys) { known = known || key == k; }
    if (!known) { throw ConfigError(section + ": unknown key '" + key + "'"); }
  }
}

template <typename T>
void read(json const &j, char const *key, T &out)
{
  if (j.contains(key)) { out = j.at(key).get<T>(); }
}

void read_irgnm(json const &j, IrgnmConfig &c)
{
  read(j, "alpha0", c.alpha0);
  read(j, "q", c.q);
  read(j, "newton_steps", c.newton_steps);
  read(j, "cg_max_iter", c.cg_max_iter);
  read(j, "cg_tolerance", c.cg_tolerance);
}

json irgnm_json(IrgnmConfig const &c)
{
  return {{"alpha0", c.alpha0},
          {"q", c.q},
          {"newton_steps", c.newton_steps},
          {"cg_max_iter", c.cg_max_iter},
          {"cg_tolerance", c.cg_tolerance}};
}

void parse_into(json const &root, RunConfig &cfg)
{
  only_keys(root, "config", {"phantom", "coils", "acquisition", "nlinv", "ame", "sobolev", "flow", "kb", "reconstruct"});

  if (root.contains("phantom")) {
    auto const &j = root["phantom"];
    only_keys(j, "phantom", {"disc_radius", "tubes", "rotation_hz", "fov", "toggle"});
    auto &p = cfg.phantom;
    read(j, "disc_radius", p.disc_radius);
    read(j, "rotation_hz", p.rotation_hz);
    read(j, "fov", p.fov);
    if (j.contains("tubes")) {
      p.tubes.clear();
      for (auto const &t : j["tubes"]) {
        only_keys(t, "phantom.tubes", {"orbit_radius", "tube_radius", "amplitude", "initial_angle"});
        Tube tube;
        read(t, "orbit_radius", tube.orbit_radius);
        read(t, "tube_radius", tube.tube_radius);
        read(t, "amplitude", tube.amplitude);
        read(t, "initial_angle", tube.initial_angle);
        p.tubes.push_back(tube);
      }
    }
    if (j.contains("toggle")) {
      if (j["toggle"].is_null()) {
        p.toggle.reset();
      } else {
        only_keys(j["toggle"], "phantom.toggle", {"interval", "dx", "dy"});
        ToggleMotion m;
        read(j["toggle"], "interval", m.interval);
        read(j["toggle"], "dx", m.dx);
        read(j["toggle"], "dy", m.dy);
        p.toggle = m;
      }
    }
  }

  if (root.contains("coils")) {
    auto const &j = root["coils"];
    only_keys(j, "coils", {"ring", "list"});
    if (j.contains("ring") && j.contains("list")) { throw ConfigError("coils: give either 'ring' or 'list'"); }
    if (j.contains("ring")) {
      auto const &r = j["ring"];
      only_keys(r, "coils.ring", {"count", "radius", "width", "phase"});
      int count = 8;
      double radius = 0.5, width = 0.4, phase = 0.5;
      read(r, "count", count);
      read(r, "radius", radius);
      read(r, "width", width);
      read(r, "phase", phase);
      if (count < 1) { throw ConfigError("coils.ring: count must be >= 1"); }
      cfg.coils = CoilModel::ring(count, radius, width, phase);
    }
    if (j.contains("list")) {
      cfg.coils.coils.clear();
      for (auto const &c : j["list"]) {
        only_keys(c, "coils.list", {"cx", "cy", "width", "phase_x", "phase_y"});
        Coil coil;
        read(c, "cx", coil.cx);
        read(c, "cy", coil.cy);
        read(c, "width", coil.width);
        read(c, "phase_x", coil.phase_x);
        read(c, "phase_y", coil.phase_y);
        cfg.coils.coils.push_back(coil);
      }
    }
  }

  if (root.contains("acquisition")) {
    auto const &j = root["acquisition"];
    only_keys(j, "acquisition", {"base_resolution", "spokes_per_frame", "readout_oversampling", "repetition_time",
                                 "interleaves", "frames", "noise_sigma", "seed"});
    auto &a = cfg.acquisition;
    read(j, "base_resolution", a.base_resolution);
    read(j, "spokes_per_frame", a.spokes_per_frame);
    read(j, "readout_oversampling", a.readout_oversampling);
    read(j, "repetition_time", a.repetition_time);
    read(j, "interleaves", a.interleaves);
    read(j, "frames", a.frames);
    read(j, "seed", a.seed);
    if (j.contains("noise_sigma")) {
      if (j["noise_sigma"].is_null()) {
        a.noise_sigma.reset();
      } else {
        a.noise_sigma = j["noise_sigma"].get<double>();
      }
    }
  }

  auto &pl = cfg.pipeline;
  if (root.contains("nlinv")) {
    only_keys(root["nlinv"], "nlinv", {"alpha0", "q", "newton_steps", "cg_max_iter", "cg_tolerance"});
    read_irgnm(root["nlinv"], pl.nlinv);
  }
  if (root.contains("ame")) {
    auto const &j = root["ame"];
    only_keys(j, "ame", {"alpha0", "q", "newton_steps", "cg_max_iter", "cg_tolerance", "window", "passes"});
    read_irgnm(j, pl.ame);
    if (j.contains("window")) {
      try {
        pl.window = WindowSpec(j["window"].get<std::vector<int>>());
      } catch (InvalidArgument const &e) {
        throw ConfigError(std::string("ame.window: ") + e.what());
      }
    }
    read(j, "passes", pl.ame_passes);
  }
  if (root.contains("sobolev")) {
    only_keys(root["sobolev"], "sobolev", {"a", "b", "m"});
    read(root["sobolev"], "a", pl.sobolev.a);
    read(root["sobolev"], "b", pl.sobolev.b);
    read(root["sobolev"], "m", pl.sobolev.m);
  }
  if (root.contains("flow")) {
    auto const &j = root["flow"];
    only_keys(j, "flow", {"lambda", "mu", "primal_dual_iters", "tau", "sigma", "pyramid_levels", "warps_per_level",
                          "u_step_scale"});
    auto &f = pl.flow;
    read(j, "lambda", f.lambda);
    read(j, "mu", f.mu);
    read(j, "primal_dual_iters", f.primal_dual_iters);
    read(j, "tau", f.tau);
    read(j, "sigma", f.sigma);
    read(j, "pyramid_levels", f.pyramid_levels);
    read(j, "warps_per_level", f.warps_per_level);
    read(j, "u_step_scale", f.u_step_scale);
  }
  if (root.contains("kb")) {
    auto const &j = root["kb"];
    only_keys(j, "kb", {"kernel_width", "beta", "oversampling", "resolution"});
    read(j, "kernel_width", pl.kb.kernel_width);
    read(j, "beta", pl.kb.beta);
    read(j, "oversampling", pl.kb.oversampling);
    read(j, "resolution", pl.kb.resolution);
  }
  if (root.contains("reconstruct")) {
    auto const &j = root["reconstruct"];
    only_keys(j, "reconstruct", {"method", "virtual_channels", "median_width"});
    if (j.contains("method")) { cfg.method = parse_method(j["method"].get<std::string>()); }
    if (j.contains("virtual_channels")) {
      if (j["virtual_channels"].is_null()) {
        cfg.virtual_channels.reset();
      } else {
        cfg.virtual_channels = j["virtual_channels"].get<int>();
      }
    }
    read(j, "median_width", cfg.median_width);
  }
}

} // namespace

Method parse_method(std::string const &name)
{
  if (name == "nlinv") { return Method::nlinv; }
  if (name == "nlinv-med") { return Method::nlinv_med; }
  if (name == "ame") { return Method::ame; }
  throw ConfigError("unknown method '" + name + "' (expected nlinv, nlinv-med or ame)");
}

std::string method_name(Method m)
{
  switch (m) {
  case Method::nlinv: return "nlinv";
  case Method::nlinv_med: return "nlinv-med";
  case Method::ame: return "ame";
  }
  return "ame";
}

void RunConfig::validate() const
{
  try {
    phantom.validate();
    coils.validate();
    acquisition.validate();
    pipeline.nlinv.validate();
    pipeline.ame.validate();
    pipeline.sobolev.validate();
    pipeline.flow.validate();
  } catch (ConfigError const &) {
    throw;
  } catch (InvalidArgument const &e) {
    throw ConfigError(e.what());
  }
  if (pipeline.ame_passes < 1) { throw ConfigError("ame.passes must be >= 1"); }
  if (virtual_channels && *virtual_channels < 1) { throw ConfigError("reconstruct.virtual_channels must be >= 1"); }
  if (median_width < 1 || median_width % 2 == 0) { throw ConfigError("reconstruct.median_width must be odd"); }
}

int RunConfig::effective_virtual_channels(int coil_count) const
{
  return virtual_channels.value_or(std::min(10, coil_count));
}

RunConfig parse_config(std::string const &json_text)
{
  RunConfig cfg;
  try {
    parse_into(json::parse(json_text), cfg);
  } catch (json::exception const &e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(std::filesystem::path const &path)
{
  std::string text;
  try {
    text = read_file(path);
  } catch (IoError const &e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

std::string dump_config(RunConfig const &cfg)
{
  json tubes = json::array();
  for (auto const &t : cfg.phantom.tubes) {
    tubes.push_back({{"orbit_radius", t.orbit_radius},
                     {"tube_radius", t.tube_radius},
                     {"amplitude", t.amplitude},
                     {"initial_angle", t.initial_angle}});
  }
  json phantom = {{"disc_radius", cfg.phantom.disc_radius},
                  {"rotation_hz", cfg.phantom.rotation_hz},
                  {"fov", cfg.phantom.fov},
                  {"tubes", tubes},
                  {"toggle", nullptr}};
  if (cfg.phantom.toggle) {
    phantom["toggle"] = {{"interval", cfg.phantom.toggle->interval},
                         {"dx", cfg.phantom.toggle->dx},
                         {"dy", cfg.phantom.toggle->dy}};
  }
  json coils = json::array();
  for (auto const &c : cfg.coils.coils) {
    coils.push_back({{"cx", c.cx}, {"cy", c.cy}, {"width", c.width}, {"phase_x", c.phase_x}, {"phase_y", c.phase_y}});
  }
  auto const &a = cfg.acquisition;
  auto const &pl = cfg.pipeline;
  json ame = irgnm_json(pl.ame);
  ame["window"] = pl.window.offsets();
  ame["passes"] = pl.ame_passes;
  json out = {
    {"phantom", phantom},
    {"coils", {{"list", coils}}},
    {"acquisition",
     {{"base_resolution", a.base_resolution},
      {"spokes_per_frame", a.spokes_per_frame},
      {"readout_oversampling", a.readout_oversampling},
      {"repetition_time", a.repetition_time},
      {"interleaves", a.interleaves},
      {"frames", a.frames},
      {"noise_sigma", a.noise_sigma ? json(*a.noise_sigma) : json(nullptr)},
      {"seed", a.seed}}},
    {"nlinv", irgnm_json(pl.nlinv)},
    {"ame", ame},
    {"sobolev", {{"a", pl.sobolev.a}, {"b", pl.sobolev.b}, {"m", pl.sobolev.m}}},
    {"flow",
     {{"lambda", pl.flow.lambda},
      {"mu", pl.flow.mu},
      {"primal_dual_iters", pl.flow.primal_dual_iters},
      {"tau", pl.flow.tau},
      {"sigma", pl.flow.sigma},
      {"pyramid_levels", pl.flow.pyramid_levels},
      {"warps_per_level", pl.flow.warps_per_level},
      {"u_step_scale", pl.flow.u_step_scale}}},
    {"kb",
     {{"kernel_width", pl.kb.kernel_width},
      {"beta", pl.kb.beta},
      {"oversampling", pl.kb.oversampling},
      {"resolution", pl.kb.resolution}}},
    {"reconstruct",
     {{"method", method_name(cfg.method)},
      {"virtual_channels", cfg.virtual_channels ? json(*cfg.virtual_channels) : json(nullptr)},
      {"median_width", cfg.median_width}}}};
  return out.dump(2) + "\n";
}

} // namespace rtmri
