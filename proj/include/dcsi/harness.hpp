#ifndef DCSI_HARNESS_HPP
#define DCSI_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dcsi/config.hpp"
#include "dcsi/feedback.hpp"
#include "dcsi/scenario.hpp"
#include "dcsi/strategies.hpp"

namespace dcsi {

inline constexpr int kCsvSchemaVersion = 1;

/// Top-level stream ids; every draw's streams hang off (seed, experiment, draw).
enum class ExperimentId : std::uint64_t { Rho = 1, Power = 2, Feedback = 3, Validate = 4 };

struct RunOptions {
  std::uint64_t seed = 20240601;
  int draws = 1000;
  int workers = 1;
  std::filesystem::path out_dir = "results";
  bool draw_hash = false;  // emit the per-point draw hash column
};

/// Everything a sweep needs, parsed and validated from a ConfigMap.
struct ExperimentConfig {
  ConfigMap raw;
  ParameterMap scenario_overrides;
  StrategySpec base_spec;
  std::vector<std::string> strategies;

  std::vector<double> rho_grid_db;
  double rho_sweep_power_dbw = 10;

  std::vector<double> power_grid_dbw;
  double power_sweep_rho_db = 0;

  std::vector<double> feedback_fractions;
  double feedback_rho_db = 0;
  double feedback_power_dbw = 10;
  FeedbackOptions feedback;

  RunOptions run;
};

/// Defaults for every key; unknown keys or bad values throw ConfigError
/// before any computation starts.
ExperimentConfig make_experiment_config(const ConfigMap& raw = {});

/// The nine strategy labels plotted against feedback SNR.
std::vector<std::string> all_strategy_labels();

/// One CSV row.
struct SweepRecord {
  std::string experiment;
  std::string x_name;
  double x_value = 0;
  std::string strategy;
  double ergodic_rate = 0;
  int num_draws = 0;
  double std_error = 0;
  std::uint64_t master_seed = 0;
  std::optional<int> xi;           // feedback bits, feedback sweep only
  std::optional<bool> xi_clamped;  // bits were capped
  std::optional<std::uint64_t> draw_hash;
};

/// Per-draw realized rates at one sweep point, paired across strategies.
struct PointRates {
  double x_value = 0;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rates;  // [strategy][draw]
  std::uint64_t draw_hash = 0;

  const std::vector<double>& of(const std::string& label) const;
};

struct SweepResult {
  std::string experiment;
  std::vector<SweepRecord> records;
  std::vector<PointRates> points;
  double wall_seconds = 0;
};

/// Progress hooks: `skip(i)` leaves point i out; `on_point` sees each finished point's rows.
struct SweepHooks {
  std::function<bool(std::size_t)> skip;
  std::function<void(std::size_t, const std::vector<SweepRecord>&)> on_point;
};

/// Realized rate of every strategy on `draws` paired channel draws. The
/// channel and TX estimates of draw d come from streams (seed, experiment, d, .)
/// and do not depend on the point's CSI quality or power.
PointRates evaluate_point(const Scenario& scenario, const std::vector<StrategySpec>& specs, std::uint64_t seed,
                          ExperimentId experiment, int draws, int workers);

SweepResult sweep_rho(const ExperimentConfig& config, const SweepHooks& hooks = {});
SweepResult sweep_power(const ExperimentConfig& config, const SweepHooks& hooks = {});
SweepResult sweep_feedback(const ExperimentConfig& config, const SweepHooks& hooks = {});

std::string csv_preamble(bool with_hash);
std::string format_record(const SweepRecord& record, bool with_hash);
std::string to_csv(const std::vector<SweepRecord>& records, bool with_hash);

/// Writes `dir/<experiment>.csv`. With `resume`, complete points already in
/// the file are kept verbatim and skipped.
SweepResult run_sweep_to_file(const std::string& experiment, const ExperimentConfig& config, bool resume);

/// Merges this run into `dir/manifest.json`.
void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& config, const std::string& experiment,
                    double wall_seconds, const std::string& started_at);

std::string utc_timestamp();

/// Runs `fn(i)` for i in [0, count) on `workers` threads. The first exception
/// (lowest index) is rethrown after all threads join.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace dcsi

#endif  // DCSI_HARNESS_HPP
