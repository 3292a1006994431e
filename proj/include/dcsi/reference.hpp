#ifndef DCSI_REFERENCE_HPP
#define DCSI_REFERENCE_HPP

#include <vector>

#include <Eigen/Dense>

#include "dcsi/scenario.hpp"
#include "dcsi/stochastics.hpp"

/// Straightforward reimplementations used as oracles: explicit inverses,
/// scalar loops, no shared helpers with the production code path.
/// Two-TX, hierarchical, TX 2 with perfect CSI.
namespace dcsi::reference {

/// Per-user SINR summed with explicit double loops.
double sum_rate_loops(const Eigen::MatrixXcd& channel, const Eigen::MatrixXcd& precoder, double noise_power);

/// RZF block via an explicit K x K inverse.
Eigen::MatrixXcd rzf_block_inverse(const Eigen::MatrixXcd& estimate, double alpha, int tx, const Scenario& s);

/// Objective of TX 1 on every grid point. Empty entries become -inf.
std::vector<double> naive_objective_tx1(const ChannelDraw& draw, const Scenario& s, const std::vector<double>& grid);
std::vector<double> locally_robust_objective_tx1(const ChannelDraw& draw, const Scenario& s,
                                                 const std::vector<double>& grid,
                                                 const std::vector<Eigen::MatrixXcd>& channel_samples);
std::vector<double> globally_robust_objective_tx1(const ChannelDraw& draw, const Scenario& s,
                                                  const std::vector<double>& grid,
                                                  const std::vector<Eigen::MatrixXcd>& channel_samples);
std::vector<double> optimal_objective_tx1(const ChannelDraw& draw, const Scenario& s, const std::vector<double>& grid,
                                          const std::vector<Eigen::MatrixXcd>& channel_samples);
/// TX 2's realized rate on every grid point given TX 1's block.
std::vector<double> best_response_objective_tx2(const ChannelDraw& draw, const Eigen::MatrixXcd& w1,
                                                const Scenario& s, const std::vector<double>& grid);

/// Index of the first maximum.
std::size_t first_argmax(const std::vector<double>& values);

/// Posterior gain sqrt(1-eps^2) Sigma A^{-1} and covariance
/// Sigma - (1-eps^2) Sigma A^{-1} Sigma with A = (1-eps^2) Sigma + eps^2 Upsilon,
/// via explicit inverse.
struct PosteriorFormula {
  Eigen::MatrixXcd gain;
  Eigen::MatrixXcd covariance;
};
PosteriorFormula posterior_formula(const Eigen::MatrixXcd& prior, const Eigen::MatrixXcd& error_cov, double eps);

}  // namespace dcsi::reference

#endif  // DCSI_REFERENCE_HPP
