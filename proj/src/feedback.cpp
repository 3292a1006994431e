#include "dcsi/feedback.hpp"

#include <cmath>

#include "dcsi/errors.hpp"
#include "dcsi/precoding.hpp"
#include "dcsi/rng.hpp"
#include "dcsi/stats.hpp"

namespace dcsi {

double feedback_bits_exact(double bandwidth_hz, double coherence_time_s, double distance_m,
                           double pathloss_exponent, double feedback_power, double noise_power) {
  if (!(noise_power > 0)) throw NumericalDomainError("feedback_bits: noise power must be positive");
  if (bandwidth_hz < 0 || coherence_time_s < 0 || distance_m < 0 || feedback_power < 0)
    throw NumericalDomainError("feedback_bits: inputs must be nonnegative");
  const double snr = std::pow(distance_m, -pathloss_exponent) * feedback_power / noise_power;
  return bandwidth_hz * coherence_time_s * std::log2(1.0 + snr);
}

std::int64_t feedback_bits(double bandwidth_hz, double coherence_time_s, double distance_m, double pathloss_exponent,
                           double feedback_power, double noise_power) {
  return static_cast<std::int64_t>(std::floor(
      feedback_bits_exact(bandwidth_hz, coherence_time_s, distance_m, pathloss_exponent, feedback_power, noise_power)));
}

Eigen::MatrixXcd Codebook::entry(Eigen::Index q) const {
  return entries.col(q).reshaped(rows, cols);
}

Codebook build_codebook(std::uint64_t seed, int bits, int rows, int cols, int bits_cap) {
  if (bits < 0) throw CapabilityError("codebook: negative bit count");
  if (bits > bits_cap)
    throw CapabilityError("codebook: " + std::to_string(bits) + " bits exceeds the cap of " +
                          std::to_string(bits_cap) +
                          "; lower the bandwidth-time product or raise feedback.xi_cap");
  Codebook cb;
  cb.seed = seed;
  cb.bits = bits;
  cb.rows = rows;
  cb.cols = cols;
  const Eigen::Index size = Eigen::Index{1} << bits;
  const Eigen::Index dim = static_cast<Eigen::Index>(rows) * cols;
  cb.entries.resize(dim, size);
  RngStream rng(seed, {static_cast<std::uint64_t>(bits), static_cast<std::uint64_t>(rows),
                       static_cast<std::uint64_t>(cols)});
  for (Eigen::Index q = 0; q < size; ++q) {
    for (Eigen::Index i = 0; i < dim; ++i) cb.entries(i, q) = rng.complex_normal();
    cb.entries.col(q) /= cb.entries.col(q).norm();
  }
  return cb;
}

Eigen::Index quantize(const Eigen::MatrixXcd& target, const Codebook& codebook) {
  if (target.rows() != codebook.rows || target.cols() != codebook.cols)
    throw StructuralError("quantize: target shape differs from the codebook");
  const double norm = target.norm();
  if (!(norm > 0)) throw DegeneratePrecoderError("quantize: zero target");
  const Eigen::VectorXcd t = target.reshaped() / norm;
  Eigen::Index best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (Eigen::Index q = 0; q < codebook.size(); ++q) {
    const double dist = (codebook.entries.col(q) - t).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = q;
    }
  }
  return best;
}

PowerSplit PowerSplit::from_fraction(double total, double fraction) {
  if (!(fraction >= 0 && fraction <= 1)) throw ConfigError("power_fraction", "must lie in [0, 1]");
  if (!(total > 0)) throw ConfigError("power_dbw", "total power must be positive");
  PowerSplit s;
  s.total = total;
  s.feedback = total * fraction;
  s.transmit = total - s.feedback;
  return s;
}

FeedbackBudget feedback_budget(const Scenario& scenario, const PowerSplit& split, const FeedbackOptions& options) {
  FeedbackBudget b;
  b.requested_bits = feedback_bits(scenario.feedback_bandwidth, scenario.coherence_time, scenario.tx_distance,
                                   scenario.pathloss_exponent, split.feedback, scenario.noise_power);
  b.clamped = b.requested_bits > options.bits_cap;
  b.bits = static_cast<int>(b.clamped ? options.bits_cap : b.requested_bits);
  return b;
}

double feedback_rate(const ChannelDraw& draw, const Scenario& s, const PowerSplit& split, const StrategySpec& spec,
                     const Codebook& codebook, const FeedbackOptions& options) {
  using Mat = Eigen::MatrixXcd;
  const Mat& h = draw.true_channel;
  const int m1 = s.antennas[0];

  // TX 1 decides as in the naive hierarchical team at full normalization.
  StrategySpec first = spec;
  first.approach = Approach::Naive;
  first.hierarchy = Hierarchy::Hierarchical;
  const GridChoice c1 = alpha_naive(0, draw, {}, first, s);
  const Mat w1 = rzf_block<double>(draw.estimates[0], c1.alpha, 0, s).weights;

  const Eigen::Index q = quantize(w1, codebook);
  const double amp = std::sqrt(split.transmit);
  const Mat shared = amp * codebook.entry(q);
  const Mat sent = options.tx1_transmits_quantized ? shared : Mat(amp * w1 / w1.norm());

  // TX 2 best-responds to what it believes TX 1 transmits.
  Mat assumed = Mat::Zero(s.total_antennas(), s.num_rx);
  assumed.topRows(m1) = shared;
  const GridChoice c2 = grid_argmax(spec.alpha_grid, [&](double alpha) -> std::optional<double> {
    try {
      assumed.bottomRows(s.antennas[1]) = rzf_block<double>(h, alpha, 1, s).weights;
    } catch (const NumericalDomainError&) {
      return std::nullopt;
    } catch (const DegeneratePrecoderError&) {
      return std::nullopt;
    }
    return sum_rate<double>(h, assumed, s.noise_power);
  });

  Mat w(s.total_antennas(), s.num_rx);
  w.topRows(m1) = sent;
  w.bottomRows(s.antennas[1]) = rzf_block<double>(h, c2.alpha, 1, s).weights;
  return sum_rate<double>(h, w, s.noise_power);
}

FeedbackResult run_feedback_tradeoff(const Scenario& s, const PowerSplit& split, const StrategySpec& spec,
                                     const std::vector<ChannelDraw>& draws, const FeedbackOptions& options) {
  if (s.num_tx != 2 || s.csi_quality[1] != 0)
    throw CapabilityError("feedback tradeoff requires two TXs with perfect CSI at TX 2");
  if (spec.approach != Approach::Naive) throw CapabilityError("feedback tradeoff uses the naive approach");
  FeedbackResult out;
  out.budget = feedback_budget(s, split, options);
  const Codebook cb = build_codebook(options.codebook_seed, out.budget.bits, s.antennas[0], s.num_rx, options.bits_cap);
  std::vector<double> rates;
  rates.reserve(draws.size());
  for (const auto& d : draws) rates.push_back(feedback_rate(d, s, split, spec, cb, options));
  const SampleSummary summary = summarize(rates);
  out.ergodic_rate = summary.mean;
  out.std_error = summary.std_error;
  return out;
}

}  // namespace dcsi
