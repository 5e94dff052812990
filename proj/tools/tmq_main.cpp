#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tmq/errors.hpp"
#include "tmq/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Temporal-mode frequency-conversion simulator"};
  app.set_version_flag("--version", std::string(TMQ_VERSION));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::vector<std::string> sets;
  int threads = 0;
  bool dry_run = false;

  const std::pair<const char*, const char*> verbs[] = {
      {"kernel", "build the frequency-conversion map and dump it"},
      {"decompose", "Schmidt decomposition: kappa spectrum and modes"},
      {"prepare", "single-photon preparation fidelity for a Gaussian input"},
      {"gate-solve", "solve pump power or length for an X, Y or Z gate"},
      {"sweep", "parameter sweep to CSV"},
  };
  for (const auto& [name, help] : verbs) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config,-c", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out,-o", out_dir, "output directory (default: config 'output')");
    sub->add_option("--set", sets, "override a config value, dotted.key=value (repeatable)")
        ->allow_extra_args(false);
    sub->add_option("--threads,-j", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--dry-run", dry_run, "print the effective config and exit");
  }
  CLI11_PARSE(app, argc, argv);

  const std::string verb = app.get_subcommands().front()->get_name();
  std::vector<std::string> overrides{"task=\"" + verb + "\""};
  overrides.insert(overrides.end(), sets.begin(), sets.end());
  if (!out_dir.empty()) {
    const auto abs = std::filesystem::absolute(out_dir).lexically_normal().string();
    overrides.push_back("output=" + nlohmann::json(abs).dump());
  }
  if (threads > 0) overrides.push_back("threads=" + std::to_string(threads));

  tmq::LoadedConfig loaded;
  try {
    loaded = tmq::parse_config(config_path, overrides);
  } catch (const tmq::Error& e) {
    std::cerr << "tmq: " << e.what() << "\n";
    return 2;
  }
  if (dry_run) {
    std::cout << tmq::serialize_config(loaded.config);
    return 0;
  }
  const auto report = tmq::run(loaded);
  if (report.exit_code != 0) {
    std::cerr << "tmq " << verb << ": " << report.error << "\n";
    if (!report.artifacts.empty()) std::cerr << "see " << (report.output_dir / "manifest.json").string() << "\n";
    return report.exit_code;
  }
  std::cout << verb << ": wrote " << report.artifacts.size() << " files to " << report.output_dir.string()
            << " in " << report.wall_seconds << " s\n";
  return 0;
}
