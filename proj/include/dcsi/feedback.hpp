#ifndef DCSI_FEEDBACK_HPP
#define DCSI_FEEDBACK_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "dcsi/scenario.hpp"
#include "dcsi/stochastics.hpp"
#include "dcsi/strategies.hpp"

namespace dcsi {

/// floor(B T log2(1 + d^-eta P_fb / noise)): bits TX 1 can send to TX 2 per
/// coherence interval over its out-of-band link.
std::int64_t feedback_bits(double bandwidth_hz, double coherence_time_s, double distance_m, double pathloss_exponent,
                           double feedback_power, double noise_power);

/// Argument of the floor in feedback_bits.
double feedback_bits_exact(double bandwidth_hz, double coherence_time_s, double distance_m,
                           double pathloss_exponent, double feedback_power, double noise_power);

inline constexpr int kDefaultBitsCap = 22;

/// 2^bits random unit-Frobenius-norm rows x cols matrices shared by both TXs.
/// Entry q is column q of `entries` (column-major vec of the matrix).
struct Codebook {
  std::uint64_t seed = 0;
  int bits = 0;
  int rows = 0;
  int cols = 0;
  Eigen::MatrixXcd entries;

  Eigen::Index size() const { return entries.cols(); }
  Eigen::MatrixXcd entry(Eigen::Index q) const;
};

/// Deterministic in (seed, bits, rows, cols). Throws CapabilityError when
/// bits > bits_cap.
Codebook build_codebook(std::uint64_t seed, int bits, int rows, int cols, int bits_cap = kDefaultBitsCap);

/// Index of the codeword nearest (Frobenius) to target / ||target||_F.
/// Ties go to the smallest index.
Eigen::Index quantize(const Eigen::MatrixXcd& target, const Codebook& codebook);

/// TX 1's budget split between the feedback link and the downlink.
struct PowerSplit {
  double feedback = 0;
  double transmit = 0;
  double total = 0;

  /// `fraction` of `total` goes to feedback; the rest to the downlink.
  static PowerSplit from_fraction(double total, double fraction);
};

struct FeedbackOptions {
  std::uint64_t codebook_seed = 0x5eedc0deULL;
  int bits_cap = 20;
  /// TX 1 sends the selected codeword (true) or its unquantized block (false).
  bool tx1_transmits_quantized = true;
};

/// Bits actually used at `split` (clamped to the cap) and whether clamping happened.
struct FeedbackBudget {
  std::int64_t requested_bits = 0;
  int bits = 0;
  bool clamped = false;
};

FeedbackBudget feedback_budget(const Scenario& scenario, const PowerSplit& split, const FeedbackOptions& options);

/// Realized sum rate for one draw: TX 1 picks its naive hierarchical block,
/// feeds back the index of the nearest codeword, transmits with power
/// split.transmit; TX 2 best-responds at the true channel to the fed-back block.
double feedback_rate(const ChannelDraw& draw, const Scenario& scenario, const PowerSplit& split,
                     const StrategySpec& spec, const Codebook& codebook, const FeedbackOptions& options);

struct FeedbackResult {
  double ergodic_rate = 0;
  double std_error = 0;
  FeedbackBudget budget;
};

/// Mean of feedback_rate over `draws`. Requires N = 2, eps_2 = 0 and the naive approach.
FeedbackResult run_feedback_tradeoff(const Scenario& scenario, const PowerSplit& split, const StrategySpec& spec,
                                     const std::vector<ChannelDraw>& draws, const FeedbackOptions& options = {});

}  // namespace dcsi

#endif  // DCSI_FEEDBACK_HPP
