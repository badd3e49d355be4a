#pragma once

#include "rtmri/ame.hpp"
#include "rtmri/phantom.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace rtmri {

/// Invalid configuration text or values.
class ConfigError : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

enum class Method { nlinv, nlinv_med, ame };

Method parse_method(std::string const &name);
std::string method_name(Method m);

struct RunConfig {
  PhantomSpec phantom = PhantomSpec::rotating_tubes(1.0);
  CoilModel coils = CoilModel::ring();
  AcquisitionSpec acquisition;
  PipelineConfig pipeline;
  Method method = Method::ame;
  std::optional<int> virtual_channels; // unset: min(10, coil count)
  int median_width = 5;

  void validate() const;
  int effective_virtual_channels(int coil_count) const;
};

/// Sections: phantom, coils, acquisition, nlinv, ame, sobolev, flow, kb,
/// reconstruct. Missing keys keep their defaults; unknown keys are errors.
RunConfig parse_config(std::string const &json_text);
RunConfig load_config(std::filesystem::path const &path);
std::string dump_config(RunConfig const &cfg);

} // namespace rtmri
