#ifndef DCSI_STOCHASTICS_HPP
#define DCSI_STOCHASTICS_HPP

#include <vector>

#include <Eigen/Dense>

#include "dcsi/gaussian.hpp"
#include "dcsi/rng.hpp"
#include "dcsi/scenario.hpp"

namespace dcsi {

/// One realization of the true channel and every TX's estimate of it.
/// Columns are receivers: true_channel.col(k) = h_k.
struct ChannelDraw {
  Eigen::MatrixXcd true_channel;             // M x K
  std::vector<Eigen::MatrixXcd> estimates;   // per TX, M x K
  std::vector<Eigen::MatrixXcd> error_draws; // per TX, M x K
};

/// Square-root factors of the per-receiver covariances, computed once.
struct ChannelFactors {
  std::vector<Eigen::MatrixXcd> per_rx;
};

ChannelFactors factor_covariances(const CovarianceSet& covs);

/// H with column k = L_k g_k, g_k ~ CN(0, I) independent across k.
Eigen::MatrixXcd sample_channel(const ChannelFactors& factors, RngStream& rng);
Eigen::MatrixXcd sample_channel(const CovarianceSet& covs, RngStream& rng);

/// Estimates sqrt(1 - eps_n^2) H + eps_n E^(n) with E^(n) columns i.i.d.
/// CN(0, Upsilon^(n)), independent across TXs. TX n draws from rng.fork(n),
/// so its errors do not depend on the other TXs' settings.
ChannelDraw sample_estimates(const Eigen::MatrixXcd& true_channel, const Scenario& scenario, RngStream& rng);

/// Every conditional law a TX needs to reason about the others, for a fixed
/// scenario. Posterior covariances and their factors are independent of the
/// observed estimate and are computed once.
class ConditionalModel {
 public:
  ConditionalModel(const Scenario& scenario, const CovarianceSet& covs);

  const Scenario& scenario() const { return scenario_; }
  /// Law of h_k given TX n's estimate h_hat_k^(n).
  const EstimatePosterior<double>& posterior(int tx, int rx) const { return posteriors_[tx][rx]; }
  /// Factor of Upsilon^(n).
  const Eigen::MatrixXcd& error_factor(int tx) const { return error_factors_[tx]; }

  /// Posterior means of every column given TX n's estimate matrix.
  Eigen::MatrixXcd posterior_mean(int tx, const Eigen::MatrixXcd& estimate) const;

  /// One draw of H from prod_k CN(mu_k^(n), Sigma_k^(n)).
  Eigen::MatrixXcd sample_channel_given(int tx, const Eigen::MatrixXcd& mean, RngStream& rng) const;

  /// TX l's estimate consistent with a channel sample: sqrt(1-eps_l^2) H + eps_l E.
  /// With H drawn from TX n's posterior this has exactly the law of TX l's
  /// estimate given TX n's.
  Eigen::MatrixXcd sample_estimate_given_channel(int tx_l, const Eigen::MatrixXcd& channel, RngStream& rng) const;

 private:
  Scenario scenario_;
  std::vector<std::vector<EstimatePosterior<double>>> posteriors_;
  std::vector<Eigen::MatrixXcd> error_factors_;
};

}  // namespace dcsi

#endif  // DCSI_STOCHASTICS_HPP
