#include "dcsi/stochastics.hpp"

#include <cmath>

namespace dcsi {
namespace {

Eigen::MatrixXcd colored_columns(const std::vector<Eigen::MatrixXcd>& factors, RngStream& rng) {
  const Eigen::Index m = factors.front().rows();
  Eigen::MatrixXcd h(m, static_cast<Eigen::Index>(factors.size()));
  for (std::size_t k = 0; k < factors.size(); ++k)
    h.col(static_cast<Eigen::Index>(k)) = factors[k] * standard_complex_normal<double>(factors[k].cols(), rng);
  return h;
}

}  // namespace

ChannelFactors factor_covariances(const CovarianceSet& covs) {
  ChannelFactors f;
  for (const auto& s : covs.per_rx) f.per_rx.push_back(psd_factor<double>(s));
  return f;
}

Eigen::MatrixXcd sample_channel(const ChannelFactors& factors, RngStream& rng) {
  return colored_columns(factors.per_rx, rng);
}

Eigen::MatrixXcd sample_channel(const CovarianceSet& covs, RngStream& rng) {
  return sample_channel(factor_covariances(covs), rng);
}

ChannelDraw sample_estimates(const Eigen::MatrixXcd& true_channel, const Scenario& scenario, RngStream& rng) {
  ChannelDraw draw;
  draw.true_channel = true_channel;
  const Eigen::Index k = true_channel.cols();
  for (int n = 0; n < scenario.num_tx; ++n) {
    RngStream tx_rng = rng.fork(static_cast<std::uint64_t>(n));
    const double eps = scenario.csi_quality[n];
    const Eigen::MatrixXcd factor = psd_factor<double>(scenario.error_covariances[n]);
    Eigen::MatrixXcd e(true_channel.rows(), k);
    for (Eigen::Index c = 0; c < k; ++c) e.col(c) = factor * standard_complex_normal<double>(factor.cols(), tx_rng);
    if (eps == 0) {
      draw.estimates.push_back(true_channel);
    } else {
      draw.estimates.push_back(std::sqrt(1 - eps * eps) * true_channel + eps * e);
    }
    draw.error_draws.push_back(std::move(e));
  }
  return draw;
}

ConditionalModel::ConditionalModel(const Scenario& scenario, const CovarianceSet& covs) : scenario_(scenario) {
  posteriors_.resize(scenario.num_tx);
  for (int n = 0; n < scenario.num_tx; ++n) {
    for (int k = 0; k < scenario.num_rx; ++k)
      posteriors_[n].emplace_back(covs.per_rx[k], scenario.error_covariances[n], scenario.csi_quality[n]);
    error_factors_.push_back(psd_factor<double>(scenario.error_covariances[n]));
  }
}

Eigen::MatrixXcd ConditionalModel::posterior_mean(int tx, const Eigen::MatrixXcd& estimate) const {
  Eigen::MatrixXcd mean(estimate.rows(), estimate.cols());
  for (Eigen::Index k = 0; k < estimate.cols(); ++k) mean.col(k) = posteriors_[tx][k].gain() * estimate.col(k);
  return mean;
}

Eigen::MatrixXcd ConditionalModel::sample_channel_given(int tx, const Eigen::MatrixXcd& mean, RngStream& rng) const {
  Eigen::MatrixXcd h = mean;
  if (scenario_.csi_quality[tx] == 0) return h;
  for (Eigen::Index k = 0; k < mean.cols(); ++k) {
    const auto& f = posteriors_[tx][k].factor();
    h.col(k) += f * standard_complex_normal<double>(f.cols(), rng);
  }
  return h;
}

Eigen::MatrixXcd ConditionalModel::sample_estimate_given_channel(int tx_l, const Eigen::MatrixXcd& channel,
                                                                 RngStream& rng) const {
  const double eps = scenario_.csi_quality[tx_l];
  if (eps == 0) return channel;
  const auto& f = error_factors_[tx_l];
  Eigen::MatrixXcd out = std::sqrt(1 - eps * eps) * channel;
  for (Eigen::Index k = 0; k < channel.cols(); ++k) out.col(k) += eps * (f * standard_complex_normal<double>(f.cols(), rng));
  return out;
}

}  // namespace dcsi
