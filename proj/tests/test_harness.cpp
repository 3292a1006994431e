#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "dcsi/errors.hpp"
#include "dcsi/harness.hpp"

using namespace dcsi;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string field_of(const ConfigMap& raw) {
  try {
    make_experiment_config(raw);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "none";
}

ConfigMap quick(ConfigMap extra = {}) {
  ConfigMap m = {{"strategy.alpha_grid_size", "5"}, {"strategy.inner_samples", "4"},
                 {"strategy.outer_samples", "2"},   {"run.draws", "3"},
                 {"sweep_rho.grid_db", "0, 10"},     {"sweep_power.grid_dbw", "0"},
                 {"feedback.power_fraction", "0.2, 0.5"}};
  for (auto& [k, v] : extra) m[k] = v;
  return m;
}

}  // namespace

TEST_CASE("configuration errors name the field before any work") {
  CHECK(field_of({{"run.bogus", "1"}}) == "run.bogus");
  CHECK(field_of({{"run.draws", "0"}}) == "run.draws");
  CHECK(field_of({{"scenario.csi_quality", "2,0"}}) == "csi_quality");
  CHECK(field_of({{"strategy.list", "OPT-h"}, {"scenario.rho_db", "0,0"}}) == "strategy.list");
  CHECK(field_of({{"feedback.power_fraction", "1.2"}}) == "feedback.power_fraction");
  CHECK(field_of({}) == "none");
}

TEST_CASE("defaults") {
  const ExperimentConfig c = make_experiment_config();
  CHECK(c.strategies.size() == 9);
  CHECK(c.rho_grid_db.size() == 9);
  CHECK(c.power_grid_dbw.size() == 6);
  CHECK(c.feedback_fractions.size() == 19);
  CHECK(c.feedback_fractions[6] == 0.35);
  CHECK(c.base_spec.alpha_grid.size() == 33);
  CHECK(c.feedback.bits_cap == 20);
}

TEST_CASE("single-point sweep to CSV") {
  const auto dir = std::filesystem::temp_directory_path() / "dcsi_harness_test";
  std::filesystem::remove_all(dir);
  ExperimentConfig c = make_experiment_config(quick({{"run.out_dir", dir.string()}, {"sweep_rho.grid_db", "5"}}));
  const SweepResult r = run_sweep_to_file("sweep_rho", c, false);
  write_manifest(dir, c, "sweep_rho", r.wall_seconds, utc_timestamp());
  const std::string text = read_file(dir / "sweep_rho.csv");
  CHECK(text.rfind("# dcsi-sweep-csv schema_version=1\nexperiment,x_name,x_value,strategy,", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2 + 9);
  CHECK(text.find("sweep_rho,rho1_db,5,GR-h,") != std::string::npos);
  const std::string manifest = read_file(dir / "manifest.json");
  CHECK(manifest.find("rng_algorithm") != std::string::npos);
  CHECK(manifest.find("sweep_rho") != std::string::npos);

  // Resuming keeps the finished point verbatim.
  const SweepResult again = run_sweep_to_file("sweep_rho", c, true);
  CHECK(again.records.empty());
  CHECK(read_file(dir / "sweep_rho.csv") == text);
  std::filesystem::remove_all(dir);
}

TEST_CASE("resume recomputes points from a different run") {
  const auto dir = std::filesystem::temp_directory_path() / "dcsi_resume_test";
  std::filesystem::remove_all(dir);
  const ConfigMap raw = quick({{"run.out_dir", dir.string()}, {"strategy.list", "NA-h, PC"}});
  const ExperimentConfig c = make_experiment_config(raw);
  run_sweep_to_file("sweep_rho", c, false);
  const std::string full = read_file(dir / "sweep_rho.csv");

  // Cut the file inside the second point: only the first point survives.
  std::ofstream(dir / "sweep_rho.csv") << full.substr(0, full.rfind("sweep_rho,rho1_db,10,PC"));
  CHECK(run_sweep_to_file("sweep_rho", c, true).records.size() == 2);
  CHECK(read_file(dir / "sweep_rho.csv") == full);

  ConfigMap other = raw;
  other["run.seed"] = "99";
  CHECK(run_sweep_to_file("sweep_rho", make_experiment_config(other), true).records.size() == 4);
  other["run.draws"] = "2";
  CHECK(run_sweep_to_file("sweep_rho", make_experiment_config(other), true).records.size() == 4);
  other["sweep_rho.grid_db"] = "0, 20";
  CHECK(run_sweep_to_file("sweep_rho", make_experiment_config(other), true).records.size() == 2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("perfect centralized does not depend on the feedback SNR") {
  const ExperimentConfig c = make_experiment_config(quick({{"strategy.list", "PC, NA-h"}}));
  const SweepResult r = sweep_rho(c);
  REQUIRE(r.points.size() == 2);
  CHECK(r.points[0].of("PC") == r.points[1].of("PC"));
  CHECK(r.points[0].of("NA-h") != r.points[1].of("NA-h"));
  CHECK(r.points[0].draw_hash != 0);
}

TEST_CASE("worker count does not change results") {
  const ExperimentConfig one = make_experiment_config(quick({{"run.workers", "1"}, {"run.draws", "6"}}));
  const ExperimentConfig many = make_experiment_config(quick({{"run.workers", "4"}, {"run.draws", "6"}}));
  CHECK(to_csv(sweep_rho(one).records, false) == to_csv(sweep_rho(many).records, false));
  CHECK(to_csv(sweep_feedback(one).records, false) == to_csv(sweep_feedback(many).records, false));
}

TEST_CASE("feedback sweep rows carry the bit budget") {
  const ExperimentConfig c = make_experiment_config(quick());
  const SweepResult r = sweep_feedback(c);
  REQUIRE(r.records.size() == 4);
  CHECK(r.records[0].strategy == "NA-h-fb");
  CHECK(r.records[1].strategy == "NA-nh");
  CHECK(r.records[0].xi.value() >= 0);
  CHECK(r.records[1].ergodic_rate == r.records[3].ergodic_rate);
}

TEST_CASE("parallel_for rethrows the first failure") {
  CHECK_THROWS_WITH(parallel_for(10, 3,
                                 [](std::size_t i) {
                                   if (i == 4 || i == 7) throw std::runtime_error("fail " + std::to_string(i));
                                 }),
                    "fail 4");
}
