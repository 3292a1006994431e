#ifndef DCSI_STRATEGIES_HPP
#define DCSI_STRATEGIES_HPP

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcsi/precoding.hpp"
#include "dcsi/rng.hpp"
#include "dcsi/scenario.hpp"
#include "dcsi/stochastics.hpp"

namespace dcsi {

enum class Approach { Naive, LocallyRobust, GloballyRobust, Optimal, PerfectCentralized };
enum class Hierarchy { Hierarchical, NonHierarchical };

/// How each TX picks its regularization factor.
struct StrategySpec {
  Approach approach = Approach::Naive;
  Hierarchy hierarchy = Hierarchy::Hierarchical;
  std::vector<double> alpha_grid = uniform_alpha_grid(33);
  int inner_samples = 200;  // draws of H given the local estimate
  int outer_samples = 20;   // draws of the other TXs' estimates

  static std::vector<double> uniform_alpha_grid(int points);

  /// Throws ConfigError / CapabilityError when unusable with `scenario`.
  void validate(const Scenario& scenario) const;
  /// Short label such as "GR-h", "NA-nh" or "PC".
  std::string label() const;
};

/// Parses a label produced by StrategySpec::label(); grid and sample counts
/// are taken from `base`.
StrategySpec parse_strategy_label(const std::string& label, const StrategySpec& base = {});

/// Regularization factors, resulting precoder, and each TX's best objective.
struct TeamDecision {
  std::vector<double> alphas;
  NetworkPrecoder<double> precoder;
  std::vector<double> objective_values;
};

/// Grid argmax result.
struct GridChoice {
  double alpha = 0;
  double objective = 0;
};

/// Values closer than this (relative) count as a tie.
inline constexpr double kTieTolerance = 1e-12;

/// Argmax of `objective` over `grid` (ascending); points where the objective
/// is empty are skipped and ties go to the smallest alpha. Throws
/// DegeneratePrecoderError if every point fails.
template <typename Objective>
GridChoice grid_argmax(const std::vector<double>& grid, Objective&& objective) {
  std::optional<GridChoice> best;
  for (double alpha : grid) {
    const std::optional<double> value = objective(alpha);
    if (!value) continue;
    if (!best || *value > best->objective + kTieTolerance * std::abs(best->objective))
      best = GridChoice{alpha, *value};
  }
  if (!best) throw DegeneratePrecoderError("grid search: every alpha on the grid failed");
  return *best;
}

/// Naive: TX n treats its estimate as the true channel and as the estimate of
/// every more informed TX (every other TX when non-hierarchical).
GridChoice alpha_naive(int tx, const ChannelDraw& draw, const std::vector<double>& prior_alphas,
                       const StrategySpec& spec, const Scenario& scenario);

/// Locally robust: like naive, but averages the sum rate over channels drawn
/// from TX n's posterior. Draws come from `rng` and are reused for every grid point.
GridChoice alpha_locally_robust(int tx, const ChannelDraw& draw, const std::vector<double>& prior_alphas,
                                const StrategySpec& spec, const ConditionalModel& model, RngStream& rng);

/// Locally robust objective on caller-supplied channel samples.
GridChoice alpha_locally_robust_on(int tx, const ChannelDraw& draw, const std::vector<double>& prior_alphas,
                                   const StrategySpec& spec, const Scenario& scenario,
                                   const std::vector<Eigen::MatrixXcd>& channel_samples);

/// Globally robust: also draws the unknown TXs' estimates, each TX building
/// its block from its own drawn estimate with TX n's alpha.
GridChoice alpha_globally_robust(int tx, const ChannelDraw& draw, const std::vector<double>& prior_alphas,
                                 const StrategySpec& spec, const ConditionalModel& model, RngStream& rng);

/// Optimal two-TX rule with hierarchical CSI and perfect CSI at TX 2: TX 1
/// maximizes the expected rate with TX 2's best response inside the
/// expectation; TX 2 then best-responds at the true channel.
/// Throws CapabilityError unless N = 2 and eps_2 = 0.
std::pair<GridChoice, GridChoice> alpha_optimal_2tx(const ChannelDraw& draw, const StrategySpec& spec,
                                                    const ConditionalModel& model, RngStream& rng);

/// Non-hierarchical counterpart: TX 1 as above; TX 2 does not see TX 1's
/// estimate, draws it, and places TX 1's best alpha inside the expectation.
std::pair<GridChoice, GridChoice> alpha_optimal_2tx_nonhierarchical(const ChannelDraw& draw,
                                                                    const StrategySpec& spec,
                                                                    const ConditionalModel& model, RngStream& rng);

/// Single alpha for every TX maximizing the true sum rate, all blocks built
/// from the true channel.
GridChoice alpha_perfect_centralized(const ChannelDraw& draw, const StrategySpec& spec, const Scenario& scenario);

/// Runs the whole team for one draw. Hierarchical teams decide TX 0..N-1 in
/// order, each seeing the previous decisions; every realized block uses the
/// TX's own estimate and its own alpha.
TeamDecision run_team(const ChannelDraw& draw, const StrategySpec& spec, const ConditionalModel& model,
                      RngStream& rng);

/// Stream ids used by the strategies under the per-draw RngStream.
enum class StrategyStream : std::uint64_t { ChannelSamples = 1, EstimateSamples = 2 };

}  // namespace dcsi

#endif  // DCSI_STRATEGIES_HPP
