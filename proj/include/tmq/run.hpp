#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tmq/config.hpp"

namespace tmq {

// Sweep plan for a config. theta0_range is turned into pump powers through
// Theta_0 ~ sqrt(P), which needs the map at the configured setup.
SweepPlan make_sweep_plan(const RunConfig& config, const ConversionSetup& setup);

struct RunReport {
  int exit_code = 0;  // 0 ok, 1 computation failed, 2 invalid configuration
  std::string error;
  std::filesystem::path output_dir;
  std::vector<std::string> artifacts;
  double wall_seconds = 0.0;
};

// Executes config.task, writing artifacts and manifest.json into
// config.output. Errors are caught, recorded in the manifest and reflected in
// the exit code.
RunReport run(const LoadedConfig& loaded);

}  // namespace tmq
