#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tmq/sweep.hpp"

namespace tmq {

enum class Task { kernel, decompose, prepare, gate_solve, sweep };

std::string to_string(Task t);
Task parse_task(const std::string& text);

struct DispersionConfig {
  DispersionKind kind = DispersionKind::sellmeier_effective;
  // "builtin:<name>" or a path (relative paths resolve against the config
  // file's directory at parse time).
  std::string file = "builtin:si3n4-bulk";
  std::array<TaylorExpansion, 4> expansions{};  // polynomial kind only
  std::optional<std::array<Window, 4>> windows;  // default: +-window_sigmas around each band
  double window_sigmas = 10.0;
  bool operator==(const DispersionConfig&) const = default;
};

enum class SignalPlacement { nondegenerate, degenerate, explicit_centres };

struct SignalConfig {
  SignalPlacement placement = SignalPlacement::nondegenerate;
  double centre3 = 0.0;  // rad/s, explicit_centres only
  double centre4 = 0.0;
  bool operator==(const SignalConfig&) const = default;
};

struct GridConfig {
  std::optional<FrequencyGrid> bands;  // explicit; otherwise auto around the signal centres
  int points = 512;
  double span_factor = 4.0;
  bool operator==(const GridConfig&) const = default;
};

struct InputConfig {
  InputPolicy policy;
  std::optional<BandwidthSearch> search;  // default [sigma1/30, 30 sigma1]
  bool operator==(const InputConfig&) const = default;
};

struct GateConfig {
  GateTarget target;
  FreeParameter free_parameter = FreeParameter::P1;
  std::optional<std::pair<double, double>> bracket;  // auto for P1/P2
  double tol = 1e-10;                                // rad
  SolveMethod method = SolveMethod::closed_form;
  int max_iterations = 200;
  bool operator==(const GateConfig& o) const {
    return target.kind == o.target.kind && target.n == o.target.n &&
           free_parameter == o.free_parameter && bracket == o.bracket && tol == o.tol &&
           method == o.method && max_iterations == o.max_iterations;
  }
};

// Pump-power values chosen so that Theta_0 runs over [start, stop] rad.
struct Theta0Range {
  double start = 0.0;
  double stop = 0.0;
  int count = 0;
  bool operator==(const Theta0Range&) const = default;
};

struct SweepConfig {
  SweptParameter parameter = SweptParameter::L;
  std::vector<double> values;  // SI; empty when theta0_range is used
  std::optional<Theta0Range> theta0_range;
  bool optimize_sigma_in = false;
  std::vector<Observable> observables;
  int kappa_count = 4;
  bool operator==(const SweepConfig&) const = default;
};

struct ExportConfig {
  int mode_count = 4;        // Schmidt pairs written to the mode CSVs
  bool kernel_dump = true;   // kernel.bin for the kernel task
  bool operator==(const ExportConfig&) const = default;
};

struct RunConfig {
  Task task = Task::decompose;
  double length = 0.0;  // m
  double gamma = 1.0;   // 1/(W m)
  std::string geometry;
  DispersionConfig dispersion;
  PumpPair pumps;
  SignalConfig signals;
  PhaseMismatchSpec mismatch;
  GridConfig grid;
  QuadratureSpec quadrature;
  double threshold = kDefaultSchmidtThreshold;
  InputConfig input;
  GateConfig gate;
  std::optional<SweepConfig> sweep;
  ExportConfig exports;
  std::string output = "out";  // resolved against the config directory
  int threads = 1;
  bool operator==(const RunConfig&) const = default;
};

struct LoadedConfig {
  RunConfig config;
  std::vector<std::string> applied_defaults;  // dotted keys filled from defaults
  std::vector<std::string> overrides;         // "--set" strings in order
};

// JSON document; every physical value is a string "<number> <unit>".
// `base_dir` anchors relative file paths. `overrides` are "dotted.key=value"
// strings applied to the document before validation; the value is read as
// JSON when it parses, else as a string.
LoadedConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir,
                               const std::vector<std::string>& overrides = {});
LoadedConfig parse_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides = {});

// Canonical SI spelling of every field (defaults included); parses back to
// an identical RunConfig.
std::string serialize_config(const RunConfig& config);

// Everything the kernel needs: dispersion loaded, signal centres located,
// windows and grid laid out.
ConversionSetup make_setup(const RunConfig& config);

}  // namespace tmq
