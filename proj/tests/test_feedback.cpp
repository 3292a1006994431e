#include <cmath>

#include "doctest.h"

#include "dcsi/errors.hpp"
#include "dcsi/feedback.hpp"

using namespace dcsi;
using Mat = Eigen::MatrixXcd;

TEST_CASE("feedback bits at the reference operating point") {
  // B T = 5, path gain 40^-2, noise 1 mW: SNR 2.1875, 5 log2(3.1875) = 8.36.
  CHECK(feedback_bits(1000, 0.005, 40, 2, 3.5, 1e-3) == 8);
  CHECK(feedback_bits_exact(1000, 0.005, 40, 2, 3.5, 1e-3) == doctest::Approx(5 * std::log2(3.1875)));
  CHECK(feedback_bits(1000, 0.005, 40, 2, 0.0, 1e-3) == 0);
}

TEST_CASE("feedback bits grow with power and stay off integer boundaries") {
  const Scenario s = build_default_scenario();
  std::int64_t previous = -1;
  for (int i = 1; i <= 19; ++i) {
    const double p = s.power_budgets[0] * i * 0.05;
    const double exact = feedback_bits_exact(s.feedback_bandwidth, s.coherence_time, s.tx_distance,
                                             s.pathloss_exponent, p, s.noise_power);
    CHECK(std::abs(exact - std::round(exact)) > 1e-9);
    const auto bits = feedback_bits(s.feedback_bandwidth, s.coherence_time, s.tx_distance, s.pathloss_exponent, p,
                                    s.noise_power);
    CHECK(bits >= previous);
    CHECK(bits <= 20);
    previous = bits;
  }
}

TEST_CASE("codebook is deterministic and unit norm") {
  const Codebook a = build_codebook(3, 6, 4, 5);
  const Codebook b = build_codebook(3, 6, 4, 5);
  CHECK(a.size() == 64);
  CHECK(a.entries == b.entries);
  CHECK(build_codebook(4, 6, 4, 5).entries != a.entries);
  for (Eigen::Index q = 0; q < a.size(); ++q) CHECK(a.entry(q).norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.entry(5).rows() == 4);
  CHECK_THROWS_AS(build_codebook(3, 21, 4, 5, 20), CapabilityError);
}

TEST_CASE("quantize picks the nearest codeword") {
  const Codebook book = build_codebook(1, 4, 4, 5);
  CHECK(quantize(3.0 * book.entry(7), book) == 7);
  const Codebook single = build_codebook(1, 0, 4, 5);
  CHECK(quantize(Mat::Ones(4, 5), single) == 0);

  RngStream rng(2);
  for (int c = 0; c < 20; ++c) {
    Mat t(4, 5);
    for (int i = 0; i < 20; ++i) t.data()[i] = rng.complex_normal();
    Eigen::Index best = 0;
    for (Eigen::Index q = 1; q < book.size(); ++q)
      if ((t / t.norm() - book.entry(q)).norm() < (t / t.norm() - book.entry(best)).norm()) best = q;
    CHECK(quantize(t, book) == best);
  }
}

TEST_CASE("bigger codebooks quantize more finely") {
  RngStream rng(3);
  std::vector<Mat> targets;
  for (int c = 0; c < 50; ++c) {
    Mat t(4, 5);
    for (int i = 0; i < 20; ++i) t.data()[i] = rng.complex_normal();
    targets.push_back(t / t.norm());
  }
  double previous = 10;
  for (int bits : {4, 8, 12}) {
    const Codebook book = build_codebook(9, bits, 4, 5);
    double mean = 0;
    for (const Mat& t : targets) mean += (t - book.entry(quantize(t, book))).norm() / targets.size();
    CHECK(mean < previous);
    previous = mean;
  }
}

TEST_CASE("power split and budget") {
  const Scenario s = build_default_scenario();
  const PowerSplit split = PowerSplit::from_fraction(10.0, 0.35);
  CHECK(split.feedback == doctest::Approx(3.5));
  CHECK(split.transmit == doctest::Approx(6.5));
  CHECK(feedback_budget(s, split, {}).bits == 8);
  FeedbackOptions capped;
  capped.bits_cap = 5;
  const FeedbackBudget b = feedback_budget(s, split, capped);
  CHECK(b.bits == 5);
  CHECK(b.clamped);
  CHECK(b.requested_bits == 8);
  CHECK_THROWS_AS(PowerSplit::from_fraction(10, 1.5), ConfigError);
}

TEST_CASE("feedback tradeoff is deterministic and needs the naive approach") {
  const Scenario s = build_default_scenario();
  const CovarianceSet covs = assemble_covariances(s);
  std::vector<ChannelDraw> draws;
  for (int d = 0; d < 5; ++d) {
    RngStream rng(4, {static_cast<std::uint64_t>(d)});
    draws.push_back(sample_estimates(sample_channel(covs, rng), s, rng));
  }
  StrategySpec spec;
  spec.alpha_grid = StrategySpec::uniform_alpha_grid(9);
  const PowerSplit split = PowerSplit::from_fraction(s.power_budgets[0], 0.35);
  const auto a = run_feedback_tradeoff(s, split, spec, draws);
  const auto b = run_feedback_tradeoff(s, split, spec, draws);
  CHECK(a.ergodic_rate == b.ergodic_rate);
  CHECK(a.ergodic_rate > 0);
  CHECK(a.budget.bits == 8);
  spec.approach = Approach::GloballyRobust;
  CHECK_THROWS_AS(run_feedback_tradeoff(s, split, spec, draws), CapabilityError);
}
