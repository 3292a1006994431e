// Command-line driver for the D-CSI precoding sweeps.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "dcsi/config.hpp"
#include "dcsi/errors.hpp"
#include "dcsi/harness.hpp"
#include "dcsi/validate.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitValidation = 2;

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> draws;
  std::optional<int> workers;
  std::optional<std::string> out;
  bool resume = false;
  bool draw_hash = false;
};

/// Config file first, then command-line overrides, then validation.
dcsi::ExperimentConfig load(const Flags& f) {
  dcsi::ConfigMap raw;
  if (!f.config_path.empty()) raw = dcsi::load_config(f.config_path);
  if (f.seed) raw["run.seed"] = std::to_string(*f.seed);
  if (f.draws) raw["run.draws"] = std::to_string(*f.draws);
  if (f.workers) raw["run.workers"] = std::to_string(*f.workers);
  if (f.out) raw["run.out_dir"] = *f.out;
  if (f.draw_hash) raw["run.draw_hash"] = "true";
  return dcsi::make_experiment_config(raw);
}

int run_sweep(const std::string& experiment, const Flags& f) {
  const dcsi::ExperimentConfig config = load(f);
  const std::string started = dcsi::utc_timestamp();
  const dcsi::SweepResult result = dcsi::run_sweep_to_file(experiment, config, f.resume);
  dcsi::write_manifest(config.run.out_dir, config, experiment, result.wall_seconds, started);
  std::cout << "wrote " << (config.run.out_dir / (experiment + ".csv")).string() << " (" << result.records.size()
            << " new rows, " << result.wall_seconds << " s)\n";
  return 0;
}

int run_validate(const Flags& f) {
  const dcsi::ExperimentConfig config = load(f);
  const dcsi::ValidationReport report = dcsi::run_validation(config.run.seed);
  std::cout << report.to_text();
  return report.passed() ? 0 : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized zero-forcing under distributed CSI: Monte Carlo sweeps"};
  app.require_subcommand(1);
  Flags flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config_path, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "master seed");
    sub->add_option("--draws", flags.draws, "channel draws per sweep point");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--workers", flags.workers, "worker threads");
  };
  std::string chosen;
  for (const auto& [name, experiment] : {std::pair{"sweep-rho", "sweep_rho"}, std::pair{"sweep-power", "sweep_power"},
                                         std::pair{"sweep-feedback", "sweep_feedback"}}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run ") + experiment);
    add_common(sub);
    sub->add_flag("--resume", flags.resume, "keep complete points of an existing CSV");
    sub->add_flag("--draw-hash", flags.draw_hash, "add a per-point hash of the channel draws");
    sub->callback([&chosen, e = std::string(experiment)] { chosen = e; });
  }
  CLI::App* validate = app.add_subcommand("validate", "run the numerical self-checks");
  add_common(validate);
  validate->callback([&chosen] { chosen = "validate"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (chosen == "validate") return run_validate(flags);
    return run_sweep(chosen, flags);
  } catch (const dcsi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const dcsi::CapabilityError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}
