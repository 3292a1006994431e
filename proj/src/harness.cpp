#include "dcsi/harness.hpp"

#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "dcsi/errors.hpp"
#include "dcsi/precoding.hpp"
#include "dcsi/stats.hpp"
#include "dcsi/stochastics.hpp"

#ifndef DCSI_VERSION
#define DCSI_VERSION "unknown"
#endif

namespace dcsi {
namespace {

enum class DrawStream : std::uint64_t { Channel = 1, Estimates = 2, Strategy = 3 };

RngStream draw_stream(std::uint64_t seed, ExperimentId e, std::size_t draw, DrawStream purpose) {
  return RngStream(seed, {static_cast<std::uint64_t>(e), static_cast<std::uint64_t>(draw),
                          static_cast<std::uint64_t>(purpose)});
}

const std::set<std::string> kKnownKeys = {
    "strategy.alpha_grid_size", "strategy.inner_samples",  "strategy.outer_samples", "strategy.list",
    "sweep_rho.grid_db",        "sweep_rho.power_dbw",     "sweep_power.grid_dbw",   "sweep_power.rho_db",
    "feedback.power_fraction",  "feedback.codebook_seed",  "feedback.xi_cap",        "feedback.tx1_transmits_quantized",
    "feedback.rho_db",          "feedback.power_dbw",      "run.seed",               "run.draws",
    "run.workers",              "run.out_dir",             "run.draw_hash"};

std::vector<double> arange(double start, double stop, double step) {
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double v = start + i * step;
    if (v > stop + 1e-9) break;
    out.push_back(std::round(v * 1e9) / 1e9);
  }
  return out;
}

int bounded_int(const ConfigMap& raw, const std::string& key, int fallback, int lo, int hi) {
  const auto it = raw.find(key);
  if (it == raw.end()) return fallback;
  const auto v = parse_int(key, it->second);
  if (v < lo || v > hi) throw ConfigError(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

double get_double(const ConfigMap& raw, const std::string& key, double fallback) {
  const auto it = raw.find(key);
  return it == raw.end() ? fallback : parse_double(key, it->second);
}

std::vector<double> get_list(const ConfigMap& raw, const std::string& key, std::vector<double> fallback) {
  const auto it = raw.find(key);
  return it == raw.end() ? fallback : parse_double_list(key, it->second);
}

std::uint64_t hash_matrix(std::uint64_t h, const Eigen::MatrixXcd& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    std::uint64_t re, im;
    const double r = m.data()[i].real(), c = m.data()[i].imag();
    std::memcpy(&re, &r, sizeof re);
    std::memcpy(&im, &c, sizeof im);
    h = splitmix64(h ^ re);
    h = splitmix64(h ^ im);
  }
  return h;
}

std::uint64_t hash_draw(const ChannelDraw& d) {
  std::uint64_t h = hash_matrix(0, d.true_channel);
  for (const auto& e : d.estimates) h = hash_matrix(h, e);
  return h;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<StrategySpec> specs_for(const ExperimentConfig& c) {
  std::vector<StrategySpec> out;
  for (const auto& label : c.strategies) out.push_back(parse_strategy_label(label, c.base_spec));
  return out;
}

SweepRecord make_record(const std::string& experiment, const std::string& x_name, double x,
                        const std::string& strategy, std::span<const double> rates, std::uint64_t seed) {
  const SampleSummary s = summarize(rates);
  SweepRecord r;
  r.experiment = experiment;
  r.x_name = x_name;
  r.x_value = x;
  r.strategy = strategy;
  r.ergodic_rate = s.mean;
  r.num_draws = static_cast<int>(s.count);
  r.std_error = s.std_error;
  r.master_seed = seed;
  return r;
}

/// Sweep over points where only the scenario changes.
SweepResult scenario_sweep(const std::string& experiment, ExperimentId id, const std::string& x_name,
                           const std::vector<double>& grid, const std::function<Scenario(double)>& scenario_at,
                           const ExperimentConfig& c, const SweepHooks& hooks) {
  const auto start = std::chrono::steady_clock::now();
  const auto specs = specs_for(c);
  SweepResult out;
  out.experiment = experiment;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (hooks.skip && hooks.skip(p)) continue;
    PointRates pr = evaluate_point(scenario_at(grid[p]), specs, c.run.seed, id, c.run.draws, c.run.workers);
    pr.x_value = grid[p];
    std::vector<SweepRecord> rows;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      rows.push_back(make_record(experiment, x_name, grid[p], pr.labels[i], pr.rates[i], c.run.seed));
      if (c.run.draw_hash) rows.back().draw_hash = pr.draw_hash;
    }
    if (hooks.on_point) hooks.on_point(p, rows);
    out.records.insert(out.records.end(), rows.begin(), rows.end());
    out.points.push_back(std::move(pr));
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

std::vector<std::string> all_strategy_labels() {
  return {"NA-h", "LR-h", "GR-h", "OPT-h", "NA-nh", "LR-nh", "GR-nh", "OPT-nh", "PC"};
}

ExperimentConfig make_experiment_config(const ConfigMap& raw) {
  for (const auto& [key, value] : raw)
    if (key.rfind("scenario.", 0) != 0 && !kKnownKeys.contains(key)) throw ConfigError(key, "unknown configuration key");

  ExperimentConfig c;
  c.raw = raw;
  c.scenario_overrides = config_group(raw, "scenario");
  const Scenario base = build_default_scenario(c.scenario_overrides);

  c.base_spec.alpha_grid = StrategySpec::uniform_alpha_grid(bounded_int(raw, "strategy.alpha_grid_size", 33, 1, 100001));
  c.base_spec.inner_samples = bounded_int(raw, "strategy.inner_samples", 200, 1, 100000000);
  c.base_spec.outer_samples = bounded_int(raw, "strategy.outer_samples", 20, 1, 100000000);
  c.strategies = raw.contains("strategy.list") ? parse_string_list(raw.at("strategy.list")) : all_strategy_labels();
  if (c.strategies.empty()) throw ConfigError("strategy.list", "no strategies requested");
  for (const auto& label : c.strategies) {
    const StrategySpec spec = parse_strategy_label(label, c.base_spec);
    try {
      spec.validate(base);
    } catch (const CapabilityError& e) {
      throw ConfigError("strategy.list", label + ": " + e.what());
    }
  }

  c.rho_grid_db = get_list(raw, "sweep_rho.grid_db", arange(-10, 30, 5));
  c.rho_sweep_power_dbw = get_double(raw, "sweep_rho.power_dbw", 10);
  c.power_grid_dbw = get_list(raw, "sweep_power.grid_dbw", arange(0, 25, 5));
  c.power_sweep_rho_db = get_double(raw, "sweep_power.rho_db", 0);
  c.feedback_fractions = get_list(raw, "feedback.power_fraction", arange(0.05, 0.95, 0.05));
  for (double f : c.feedback_fractions)
    if (!(f >= 0 && f <= 1)) throw ConfigError("feedback.power_fraction", "fractions must lie in [0, 1]");
  c.feedback_rho_db = get_double(raw, "feedback.rho_db", 0);
  c.feedback_power_dbw = get_double(raw, "feedback.power_dbw", 10);
  if (raw.contains("feedback.codebook_seed"))
    c.feedback.codebook_seed = parse_u64("feedback.codebook_seed", raw.at("feedback.codebook_seed"));
  c.feedback.bits_cap = bounded_int(raw, "feedback.xi_cap", 20, 0, 26);
  if (raw.contains("feedback.tx1_transmits_quantized"))
    c.feedback.tx1_transmits_quantized =
        parse_bool("feedback.tx1_transmits_quantized", raw.at("feedback.tx1_transmits_quantized"));
  for (double v : {c.rho_sweep_power_dbw, c.feedback_power_dbw})
    if (!std::isfinite(v)) throw ConfigError("power_dbw", "must be finite");
  for (double v : c.power_grid_dbw)
    if (!std::isfinite(v)) throw ConfigError("sweep_power.grid_dbw", "must be finite");

  if (raw.contains("run.seed")) c.run.seed = parse_u64("run.seed", raw.at("run.seed"));
  c.run.draws = bounded_int(raw, "run.draws", 1000, 1, 100000000);
  c.run.workers = bounded_int(raw, "run.workers", 1, 1, 1024);
  if (raw.contains("run.out_dir")) c.run.out_dir = raw.at("run.out_dir");
  if (raw.contains("run.draw_hash")) c.run.draw_hash = parse_bool("run.draw_hash", raw.at("run.draw_hash"));
  return c;
}

const std::vector<double>& PointRates::of(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return rates[i];
  throw std::out_of_range("PointRates: no strategy " + label);
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

PointRates evaluate_point(const Scenario& scenario, const std::vector<StrategySpec>& specs, std::uint64_t seed,
                          ExperimentId experiment, int draws, int workers) {
  for (const auto& s : specs) s.validate(scenario);
  const CovarianceSet covs = assemble_covariances(scenario);
  const ChannelFactors factors = factor_covariances(covs);
  const ConditionalModel model(scenario, covs);

  PointRates out;
  for (const auto& s : specs) out.labels.push_back(s.label());
  out.rates.assign(specs.size(), std::vector<double>(draws));
  std::vector<std::uint64_t> hashes(draws);

  parallel_for(static_cast<std::size_t>(draws), workers, [&](std::size_t d) {
    RngStream channel_rng = draw_stream(seed, experiment, d, DrawStream::Channel);
    RngStream estimate_rng = draw_stream(seed, experiment, d, DrawStream::Estimates);
    const Eigen::MatrixXcd h = sample_channel(factors, channel_rng);
    const ChannelDraw draw = sample_estimates(h, scenario, estimate_rng);
    hashes[d] = hash_draw(draw);
    for (std::size_t i = 0; i < specs.size(); ++i) {
      RngStream strategy_rng = draw_stream(seed, experiment, d, DrawStream::Strategy);
      const TeamDecision team = run_team(draw, specs[i], model, strategy_rng);
      out.rates[i][d] = sum_rate<double>(h, team.precoder.weights, scenario.noise_power);
    }
  });
  for (std::uint64_t h : hashes) out.draw_hash = splitmix64(out.draw_hash ^ h);
  return out;
}

SweepResult sweep_rho(const ExperimentConfig& c, const SweepHooks& hooks) {
  const Scenario base = with_power(build_default_scenario(c.scenario_overrides), dbw_to_watts(c.rho_sweep_power_dbw));
  return scenario_sweep(
      "sweep_rho", ExperimentId::Rho, "rho1_db", c.rho_grid_db,
      [&](double rho) {
        auto eps = base.csi_quality;
        eps[0] = epsilon_from_rho_db(rho);
        return with_csi_quality(base, eps);
      },
      c, hooks);
}

SweepResult sweep_power(const ExperimentConfig& c, const SweepHooks& hooks) {
  Scenario base = build_default_scenario(c.scenario_overrides);
  auto eps = base.csi_quality;
  eps[0] = epsilon_from_rho_db(c.power_sweep_rho_db);
  base = with_csi_quality(base, eps);
  return scenario_sweep(
      "sweep_power", ExperimentId::Power, "power_dbw", c.power_grid_dbw,
      [&](double p) { return with_power(base, dbw_to_watts(p)); }, c, hooks);
}

SweepResult sweep_feedback(const ExperimentConfig& c, const SweepHooks& hooks) {
  const auto start = std::chrono::steady_clock::now();
  Scenario s = with_power(build_default_scenario(c.scenario_overrides), dbw_to_watts(c.feedback_power_dbw));
  auto eps = s.csi_quality;
  eps[0] = epsilon_from_rho_db(c.feedback_rho_db);
  s = with_csi_quality(s, eps);
  if (s.num_tx != 2 || s.csi_quality[1] != 0)
    throw ConfigError("scenario", "feedback sweep needs two TXs with perfect CSI at TX 2");

  StrategySpec hier = c.base_spec;
  hier.approach = Approach::Naive;
  hier.hierarchy = Hierarchy::Hierarchical;
  StrategySpec baseline = hier;
  baseline.hierarchy = Hierarchy::NonHierarchical;

  const CovarianceSet covs = assemble_covariances(s);
  const ChannelFactors factors = factor_covariances(covs);
  const ConditionalModel model(s, covs);
  const int draws = c.run.draws;

  // Draws and the full-power baseline do not depend on the split.
  std::vector<ChannelDraw> channel_draws(draws);
  std::vector<double> baseline_rates(draws);
  std::vector<std::uint64_t> hashes(draws);
  parallel_for(static_cast<std::size_t>(draws), c.run.workers, [&](std::size_t d) {
    RngStream channel_rng = draw_stream(c.run.seed, ExperimentId::Feedback, d, DrawStream::Channel);
    RngStream estimate_rng = draw_stream(c.run.seed, ExperimentId::Feedback, d, DrawStream::Estimates);
    channel_draws[d] = sample_estimates(sample_channel(factors, channel_rng), s, estimate_rng);
    hashes[d] = hash_draw(channel_draws[d]);
    RngStream strategy_rng = draw_stream(c.run.seed, ExperimentId::Feedback, d, DrawStream::Strategy);
    const TeamDecision team = run_team(channel_draws[d], baseline, model, strategy_rng);
    baseline_rates[d] = sum_rate<double>(channel_draws[d].true_channel, team.precoder.weights, s.noise_power);
  });
  std::uint64_t draw_hash = 0;
  for (std::uint64_t h : hashes) draw_hash = splitmix64(draw_hash ^ h);

  SweepResult out;
  out.experiment = "sweep_feedback";
  std::map<int, Codebook> codebooks;
  for (std::size_t p = 0; p < c.feedback_fractions.size(); ++p) {
    if (hooks.skip && hooks.skip(p)) continue;
    const double f = c.feedback_fractions[p];
    const PowerSplit split = PowerSplit::from_fraction(s.power_budgets[0], f);
    const FeedbackBudget budget = feedback_budget(s, split, c.feedback);
    if (!codebooks.contains(budget.bits))
      codebooks.emplace(budget.bits, build_codebook(c.feedback.codebook_seed, budget.bits, s.antennas[0], s.num_rx,
                                                    c.feedback.bits_cap));
    const Codebook& cb = codebooks.at(budget.bits);

    PointRates pr;
    pr.x_value = f;
    pr.labels = {"NA-h-fb", "NA-nh"};
    pr.rates = {std::vector<double>(draws), baseline_rates};
    pr.draw_hash = draw_hash;
    parallel_for(static_cast<std::size_t>(draws), c.run.workers, [&](std::size_t d) {
      pr.rates[0][d] = feedback_rate(channel_draws[d], s, split, hier, cb, c.feedback);
    });

    std::vector<SweepRecord> rows;
    for (std::size_t i = 0; i < pr.labels.size(); ++i) {
      rows.push_back(make_record(out.experiment, "feedback_fraction", f, pr.labels[i], pr.rates[i], c.run.seed));
      rows.back().xi = budget.bits;
      rows.back().xi_clamped = budget.clamped;
      if (c.run.draw_hash) rows.back().draw_hash = draw_hash;
    }
    if (hooks.on_point) hooks.on_point(p, rows);
    out.records.insert(out.records.end(), rows.begin(), rows.end());
    out.points.push_back(std::move(pr));
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::string csv_preamble(bool with_hash) {
  std::string s = "# dcsi-sweep-csv schema_version=" + std::to_string(kCsvSchemaVersion) + "\n";
  s += "experiment,x_name,x_value,strategy,ergodic_rate,num_draws,std_error,master_seed,xi,xi_clamped";
  if (with_hash) s += ",draw_hash";
  return s + "\n";
}

std::string format_record(const SweepRecord& r, bool with_hash) {
  std::string s = r.experiment + "," + r.x_name + "," + format_double(r.x_value) + "," + r.strategy + "," +
                  format_double(r.ergodic_rate) + "," + std::to_string(r.num_draws) + "," +
                  format_double(r.std_error) + "," + std::to_string(r.master_seed) + ",";
  if (r.xi) s += std::to_string(*r.xi);
  s += ",";
  if (r.xi_clamped) s += *r.xi_clamped ? "1" : "0";
  if (with_hash) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, r.draw_hash.value_or(0));
    s += std::string(",") + buf;
  }
  return s + "\n";
}

std::string to_csv(const std::vector<SweepRecord>& records, bool with_hash) {
  std::string s = csv_preamble(with_hash);
  for (const auto& r : records) s += format_record(r, with_hash);
  return s;
}

SweepResult run_sweep_to_file(const std::string& experiment, const ExperimentConfig& c, bool resume) {
  std::filesystem::create_directories(c.run.out_dir);
  const auto path = c.run.out_dir / (experiment + ".csv");
  const std::string preamble = csv_preamble(c.run.draw_hash);

  const std::vector<double>* grid = nullptr;
  std::vector<std::string> labels = c.strategies;
  if (experiment == "sweep_rho") grid = &c.rho_grid_db;
  else if (experiment == "sweep_power") grid = &c.power_grid_dbw;
  else if (experiment == "sweep_feedback") grid = &c.feedback_fractions, labels = {"NA-h-fb", "NA-nh"};
  else throw ConfigError("experiment", "unknown experiment " + experiment);
  const std::size_t per_point = labels.size();

  // A kept row must name the same experiment, grid value, strategy, draw count
  // and seed as the row this run would write in its place.
  const auto row_matches = [&](const std::string& line, std::size_t row) {
    std::vector<std::string> f;
    std::istringstream fields(line);
    for (std::string item; std::getline(fields, item, ',');) f.push_back(item);
    return f.size() >= 8 && f[0] == experiment && f[2] == format_double((*grid)[row / per_point]) &&
           f[3] == labels[row % per_point] && f[5] == std::to_string(c.run.draws) &&
           f[7] == std::to_string(c.run.seed);
  };

  // Keep the leading complete points of an earlier run of the same configuration.
  std::vector<std::string> kept;
  if (resume && std::filesystem::exists(path)) {
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (text.rfind(preamble, 0) == 0) {
      std::istringstream lines(text.substr(preamble.size()));
      std::string line;
      while (kept.size() < per_point * grid->size() && std::getline(lines, line) &&
             row_matches(line, kept.size()))
        kept.push_back(line + "\n");
      kept.resize(kept.size() - kept.size() % per_point);
    }
  }
  const std::size_t done = kept.size() / per_point;

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("run.out_dir", "cannot write " + path.string());
  out << preamble;
  for (const auto& l : kept) out << l;
  out.flush();

  SweepHooks hooks;
  hooks.skip = [done](std::size_t p) { return p < done; };
  hooks.on_point = [&](std::size_t, const std::vector<SweepRecord>& rows) {
    for (const auto& r : rows) out << format_record(r, c.run.draw_hash);
    out.flush();
  };
  if (experiment == "sweep_rho") return sweep_rho(c, hooks);
  if (experiment == "sweep_power") return sweep_power(c, hooks);
  return sweep_feedback(c, hooks);
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& c, const std::string& experiment,
                    double wall_seconds, const std::string& started_at) {
  using nlohmann::json;
  std::filesystem::create_directories(dir);
  const auto path = dir / "manifest.json";
  json m = json::object();
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    m = json::parse(in, nullptr, false);
    if (m.is_discarded() || !m.is_object()) m = json::object();
  }
  m["code_version"] = DCSI_VERSION;
  m["rng_algorithm"] = std::string(RngStream::kAlgorithm);
  m["csv_schema_version"] = kCsvSchemaVersion;

  json cfg = json::object();
  for (const auto& [k, v] : c.raw) cfg[k] = v;
  json entry;
  entry["config"] = cfg;
  entry["master_seed"] = c.run.seed;
  entry["draws"] = c.run.draws;
  entry["workers"] = c.run.workers;
  entry["strategies"] = c.strategies;
  entry["alpha_grid_size"] = c.base_spec.alpha_grid.size();
  entry["inner_samples"] = c.base_spec.inner_samples;
  entry["outer_samples"] = c.base_spec.outer_samples;
  entry["started_at"] = started_at;
  entry["finished_at"] = utc_timestamp();
  entry["wall_seconds"] = wall_seconds;
  m["experiments"][experiment] = entry;

  std::ofstream out(path, std::ios::trunc);
  out << m.dump(2) << "\n";
}

}  // namespace dcsi
