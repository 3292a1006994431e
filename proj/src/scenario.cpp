#include "dcsi/scenario.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "dcsi/array.hpp"
#include "dcsi/config.hpp"
#include "dcsi/errors.hpp"

namespace dcsi {
namespace {

const std::set<std::string> kKnownKeys = {
    "num_tx",        "num_rx",           "antennas",         "tx_distance",
    "antenna_spacing", "angle_spread",   "pathloss_exponent", "noise_power_dbm",
    "power_dbw",     "rho_db",           "csi_quality",      "bandwidth_hz",
    "coherence_time_s", "quadrature_points", "error_scale"};

double positive(const std::string& field, double v) {
  if (!(v > 0) || !std::isfinite(v)) throw ConfigError(field, "must be positive and finite");
  return v;
}

int count(const std::string& field, const ParameterMap& p, int fallback, int min_value) {
  const auto it = p.find(field);
  if (it == p.end()) return fallback;
  const auto v = parse_int(field, it->second);
  if (v < min_value || v > 4096)
    throw ConfigError(field, "must be an integer in [" + std::to_string(min_value) + ", 4096]");
  return static_cast<int>(v);
}

double real(const std::string& field, const ParameterMap& p, double fallback) {
  const auto it = p.find(field);
  return it == p.end() ? fallback : parse_double(field, it->second);
}

/// Scalar broadcasts to all TXs; otherwise the list length must be num_tx.
std::vector<double> per_tx(const std::string& field, const ParameterMap& p, int num_tx,
                           std::vector<double> fallback) {
  const auto it = p.find(field);
  std::vector<double> v = it == p.end() ? std::move(fallback) : parse_double_list(field, it->second);
  if (v.size() == 1) v.assign(num_tx, v.front());
  if (static_cast<int>(v.size()) != num_tx)
    throw ConfigError(field, "expected 1 or " + std::to_string(num_tx) + " values");
  return v;
}

}  // namespace

int Scenario::total_antennas() const {
  int m = 0;
  for (int a : antennas) m += a;
  return m;
}

int Scenario::row_offset(int n) const {
  int off = 0;
  for (int l = 0; l < n; ++l) off += antennas[l];
  return off;
}

double epsilon_from_rho_db(double rho_db) {
  if (std::isinf(rho_db) && rho_db > 0) return 0.0;
  const double rho = std::pow(10.0, rho_db / 10.0);
  return std::sqrt(1.0 / (1.0 + rho));
}

double dbw_to_watts(double dbw) { return std::pow(10.0, dbw / 10.0); }
double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

Scenario build_default_scenario(const ParameterMap& overrides) {
  for (const auto& [key, value] : overrides)
    if (!kKnownKeys.contains(key)) throw ConfigError(key, "unknown scenario parameter");
  if (overrides.contains("rho_db") && overrides.contains("csi_quality"))
    throw ConfigError("csi_quality", "give either rho_db or csi_quality, not both");

  Scenario s;
  s.num_tx = count("num_tx", overrides, 2, 1);
  s.num_rx = count("num_rx", overrides, 5, 1);
  for (double m : per_tx("antennas", overrides, s.num_tx, {4.0})) {
    if (m < 1 || m != std::floor(m) || m > 1024)
      throw ConfigError("antennas", "antenna counts must be integers in [1, 1024]");
    s.antennas.push_back(static_cast<int>(m));
  }
  s.tx_distance = positive("tx_distance", real("tx_distance", overrides, 40.0));
  s.antenna_spacing = positive("antenna_spacing", real("antenna_spacing", overrides, 0.5));
  s.angle_spread = real("angle_spread", overrides, std::numbers::pi / 8);
  if (!(s.angle_spread >= 0) || s.angle_spread > std::numbers::pi)
    throw ConfigError("angle_spread", "must lie in [0, pi]");
  s.pathloss_exponent = real("pathloss_exponent", overrides, 2.0);
  if (!(s.pathloss_exponent >= 0) || !std::isfinite(s.pathloss_exponent))
    throw ConfigError("pathloss_exponent", "must be nonnegative");
  s.noise_power = positive("noise_power_dbm", dbm_to_watts(real("noise_power_dbm", overrides, 0.0)));
  for (double p : per_tx("power_dbw", overrides, s.num_tx, {10.0}))
    s.power_budgets.push_back(positive("power_dbw", dbw_to_watts(p)));

  if (overrides.contains("csi_quality")) {
    s.csi_quality = per_tx("csi_quality", overrides, s.num_tx, {});
  } else {
    // TX 1 at 0 dB feedback SNR; every other TX perfect.
    std::vector<double> rho(s.num_tx, std::numeric_limits<double>::infinity());
    rho[0] = 0.0;
    for (double r : per_tx("rho_db", overrides, s.num_tx, rho)) s.csi_quality.push_back(epsilon_from_rho_db(r));
  }
  s.feedback_bandwidth = positive("bandwidth_hz", real("bandwidth_hz", overrides, 1000.0));
  s.coherence_time = positive("coherence_time_s", real("coherence_time_s", overrides, 0.005));
  s.quadrature_points = count("quadrature_points", overrides, 256, 1);

  const int m_total = s.total_antennas();
  const double error_scale = positive("error_scale", real("error_scale", overrides, 1.0));
  s.error_covariances.assign(s.num_tx, error_scale * Eigen::MatrixXcd::Identity(m_total, m_total));

  // TXs on the x-axis from the origin to (d, 0); receivers on the upper half of
  // the circle of radius d/2 around the midpoint, equispaced in [pi/4, 3pi/4].
  for (int n = 0; n < s.num_tx; ++n) {
    const double x = s.num_tx == 1 ? 0.0 : s.tx_distance * n / (s.num_tx - 1);
    s.tx_positions.emplace_back(x, 0.0);
  }
  const Eigen::Vector2d center(s.tx_distance / 2, 0.0);
  for (int k = 0; k < s.num_rx; ++k) {
    const double phi = s.num_rx == 1 ? std::numbers::pi / 2
                                     : std::numbers::pi / 4 + k * (std::numbers::pi / 2) / (s.num_rx - 1);
    s.rx_positions.push_back(center + s.tx_distance / 2 * Eigen::Vector2d(std::cos(phi), std::sin(phi)));
  }

  s.mean_aods.resize(s.num_rx, s.num_tx);
  s.distances.resize(s.num_rx, s.num_tx);
  s.attenuations.resize(s.num_rx, s.num_tx);
  for (int k = 0; k < s.num_rx; ++k) {
    for (int n = 0; n < s.num_tx; ++n) {
      const Eigen::Vector2d delta = s.rx_positions[k] - s.tx_positions[n];
      s.distances(k, n) = delta.norm();
      s.mean_aods(k, n) = std::atan2(std::abs(delta.y()), delta.x());
      s.attenuations(k, n) = std::pow(s.distances(k, n), -s.pathloss_exponent / 2);
    }
  }
  if (!(s.distances.minCoeff() > 0)) throw ConfigError("tx_distance", "receiver coincides with a transmitter");

  validate_scenario(s);
  return s;
}

void validate_scenario(const Scenario& s) {
  if (s.num_tx < 1) throw ConfigError("num_tx", "must be at least 1");
  if (s.num_rx < 1) throw ConfigError("num_rx", "must be at least 1");
  if (static_cast<int>(s.antennas.size()) != s.num_tx) throw ConfigError("antennas", "length must equal num_tx");
  if (static_cast<int>(s.power_budgets.size()) != s.num_tx)
    throw ConfigError("power_dbw", "length must equal num_tx");
  if (static_cast<int>(s.csi_quality.size()) != s.num_tx)
    throw ConfigError("csi_quality", "length must equal num_tx");
  if (static_cast<int>(s.error_covariances.size()) != s.num_tx)
    throw ConfigError("error_covariances", "length must equal num_tx");
  for (double e : s.csi_quality)
    if (!(e >= 0 && e <= 1)) throw ConfigError("csi_quality", "epsilon must lie in [0, 1]");
  for (double p : s.power_budgets)
    if (!(p > 0)) throw ConfigError("power_dbw", "power budgets must be positive");
  if (!(s.noise_power > 0)) throw ConfigError("noise_power_dbm", "noise power must be positive");
  const int m = s.total_antennas();
  for (const auto& u : s.error_covariances) {
    if (u.rows() != m || u.cols() != m) throw ConfigError("error_covariances", "must be M x M");
    if (hermitian_defect(u) > 1e-12 * (1.0 + u.norm()))
      throw ConfigError("error_covariances", "must be Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(u, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * (1.0 + u.trace().real()))
      throw ConfigError("error_covariances", "must be positive semidefinite");
  }
  if (s.attenuations.rows() != s.num_rx || s.attenuations.cols() != s.num_tx)
    throw ConfigError("attenuations", "must be K x N");
  for (int k = 0; k < s.num_rx; ++k)
    for (int n = 0; n < s.num_tx; ++n) {
      const double expected = std::pow(s.distances(k, n), -s.pathloss_exponent / 2);
      if (std::abs(s.attenuations(k, n) - expected) > 1e-12 * expected)
        throw ConfigError("attenuations", "inconsistent with distances and pathloss exponent");
    }
}

Scenario with_csi_quality(Scenario scenario, std::vector<double> epsilons) {
  scenario.csi_quality = std::move(epsilons);
  validate_scenario(scenario);
  return scenario;
}

Scenario with_power(Scenario scenario, double watts) {
  scenario.power_budgets.assign(scenario.num_tx, watts);
  validate_scenario(scenario);
  return scenario;
}

CovarianceSet assemble_covariances(const Scenario& s, int quadrature_points) {
  CovarianceSet out;
  out.per_link.resize(s.num_rx);
  for (int k = 0; k < s.num_rx; ++k) {
    for (int n = 0; n < s.num_tx; ++n)
      out.per_link[k].push_back(link_covariance(s.mean_aods(k, n), s.angle_spread, s.attenuations(k, n),
                                                s.antennas[n], s.antenna_spacing, quadrature_points));
    out.per_rx.push_back(block_diagonal(out.per_link[k]));
  }
  return out;
}

}  // namespace dcsi
