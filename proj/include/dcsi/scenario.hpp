#ifndef DCSI_SCENARIO_HPP
#define DCSI_SCENARIO_HPP

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dcsi {

/// Flat key/value parameters, keys without group prefix (e.g. "num_rx").
using ParameterMap = std::map<std::string, std::string>;

/// Physical setup of the cooperative downlink. Immutable once built.
///
/// Matrices indexed (k, n) are K x N: row = receiver, column = transmitter.
/// The CSI hierarchy follows transmitter index order: TX n knows the
/// estimates of every TX l <= n.
struct Scenario {
  int num_tx = 0;
  int num_rx = 0;
  std::vector<int> antennas;  // M_n per TX
  double antenna_spacing = 0;  // spacing / wavelength
  double angle_spread = 0;     // radians, half-width of the uniform AoD law
  Eigen::MatrixXd mean_aods;   // radians, in [0, pi]
  Eigen::MatrixXd distances;   // meters
  double pathloss_exponent = 0;
  Eigen::MatrixXd attenuations;  // distances^(-eta/2)
  double noise_power = 0;        // watts
  std::vector<double> power_budgets;  // watts
  std::vector<double> csi_quality;    // epsilon_n in [0, 1]
  std::vector<Eigen::MatrixXcd> error_covariances;  // M x M each
  double tx_distance = 0;         // meters
  double feedback_bandwidth = 0;  // hertz
  double coherence_time = 0;      // seconds
  int quadrature_points = 256;

  std::vector<Eigen::Vector2d> tx_positions;
  std::vector<Eigen::Vector2d> rx_positions;

  int total_antennas() const;
  /// First row of TX n's block in the stacked M-dimensional channel.
  int row_offset(int n) const;
};

/// Builds the two-TX reference setup and applies `overrides`.
///
/// Recognized keys: num_tx, num_rx, antennas (list), tx_distance,
/// antenna_spacing, angle_spread, pathloss_exponent, noise_power_dbm,
/// power_dbw (scalar or list), rho_db (list, "inf" = perfect CSI),
/// csi_quality (list of epsilon), bandwidth_hz, coherence_time_s,
/// quadrature_points, error_scale (multiplies the identity error
/// covariance; default 1). Throws ConfigError naming the field on bad input.
Scenario build_default_scenario(const ParameterMap& overrides = {});

/// Checks every Scenario invariant; throws ConfigError on the first violation.
void validate_scenario(const Scenario& scenario);

/// Copy of `scenario` with new per-TX CSI quality.
Scenario with_csi_quality(Scenario scenario, std::vector<double> epsilons);
/// Copy of `scenario` with every TX power budget set to `watts`.
Scenario with_power(Scenario scenario, double watts);

/// epsilon^2 = 1 / (1 + rho), rho given in dB. +inf dB maps to 0.
double epsilon_from_rho_db(double rho_db);
double dbw_to_watts(double dbw);
double dbm_to_watts(double dbm);

/// Per-link and per-receiver spatial covariances.
struct CovarianceSet {
  /// per_link[k][n] is M_n x M_n.
  std::vector<std::vector<Eigen::MatrixXcd>> per_link;
  /// per_rx[k] = blkdiag(per_link[k][0], ..., per_link[k][N-1]).
  std::vector<Eigen::MatrixXcd> per_rx;
};

CovarianceSet assemble_covariances(const Scenario& scenario, int quadrature_points);
inline CovarianceSet assemble_covariances(const Scenario& scenario) {
  return assemble_covariances(scenario, scenario.quadrature_points);
}

}  // namespace dcsi

#endif  // DCSI_SCENARIO_HPP
