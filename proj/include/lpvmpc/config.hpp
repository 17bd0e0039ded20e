#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "lpvmpc/controller.hpp"
#include "lpvmpc/simulator.hpp"
#include "lpvmpc/trajectory.hpp"

namespace lpvmpc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything one `simulate` run needs, read from a dotted key=value file.
struct RunConfig {
  std::filesystem::path trajectory_file;
  TrajectoryOptions traj_opts;
  VehicleParams vehicle;
  ControllerConfig controller;
  SimConfig sim;
  std::filesystem::path out_dir = ".";
  std::string prefix = "run";

  // Plant-vs-model mismatch knob, applied multiplicatively to the plant side.
  double plant_scale_m = 1.0;
  double plant_scale_iz = 1.0;
  double plant_scale_caf = 1.0;
  double plant_scale_car = 1.0;
  double plant_scale_mu = 1.0;

  /// Plant parameters after scaling.
  VehicleParams plant_params() const;
};

/// Parses and validates a config file. Unknown keys, malformed values, and
/// invalid parameter combinations all raise ConfigError.
RunConfig parse_run_config(const std::filesystem::path& path);

/// Same, from an in-memory string (used by tests); `name` labels messages.
RunConfig parse_run_config_text(const std::string& text, const std::string& name = "<config>");

}  // namespace lpvmpc
