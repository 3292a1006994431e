#include "dcsi/strategies.hpp"

#include <cmath>
#include <limits>

#include "dcsi/config.hpp"
#include "dcsi/errors.hpp"

namespace dcsi {
namespace {

using Mat = Eigen::MatrixXcd;

constexpr std::uint64_t stream_id(StrategyStream s) { return static_cast<std::uint64_t>(s); }

/// Writes TX `tx`'s normalized block taken from `direction` into rows of `w`.
void write_block(Mat& w, const Scenario& s, int tx, const Mat& direction) {
  const int off = s.row_offset(tx);
  const int rows = s.antennas[tx];
  const double norm = direction.middleRows(off, rows).norm();
  if (!(norm > 0) || !std::isfinite(norm))
    throw DegeneratePrecoderError("rzf: TX " + std::to_string(tx) + " block has zero or non-finite norm");
  w.middleRows(off, rows) = direction.middleRows(off, rows) * (std::sqrt(s.power_budgets[tx]) / norm);
}

/// Runs `f`, mapping the numerical failures of RZF construction to nullopt.
template <typename F>
auto guarded(F&& f) -> std::optional<decltype(f())> {
  try {
    return f();
  } catch (const NumericalDomainError&) {
    return std::nullopt;
  } catch (const DegeneratePrecoderError&) {
    return std::nullopt;
  }
}

/// Blocks of TXs 0..prior.size()-1, built from their own estimates; zero elsewhere.
Mat known_blocks(const ChannelDraw& draw, const std::vector<double>& prior, const Scenario& s) {
  Mat w = Mat::Zero(s.total_antennas(), s.num_rx);
  for (std::size_t l = 0; l < prior.size(); ++l)
    write_block(w, s, static_cast<int>(l), rzf_direction<double>(draw.estimates[l], prior[l]));
  return w;
}

void check_tx(int tx, const std::vector<double>& prior, const StrategySpec& spec, const Scenario& s) {
  if (tx < 0 || tx >= s.num_tx) throw StructuralError("strategy: TX index out of range");
  const std::size_t expected = spec.hierarchy == Hierarchy::Hierarchical ? static_cast<std::size_t>(tx) : 0;
  if (prior.size() != expected)
    throw StructuralError("strategy: expected " + std::to_string(expected) + " prior alphas, got " +
                          std::to_string(prior.size()));
}

/// First TX whose block TX `tx` builds from its own estimate in the naive and
/// locally robust pictures.
int first_shared(int tx, const StrategySpec& spec) { return spec.hierarchy == Hierarchy::Hierarchical ? tx : 0; }

/// Network precoder as TX `tx` pictures it under the naive/LR assumption.
Mat shared_estimate_precoder(int tx, const ChannelDraw& draw, const Mat& known, double alpha,
                             const StrategySpec& spec, const Scenario& s) {
  Mat w = known;
  const Mat d = rzf_direction<double>(draw.estimates[tx], alpha);
  for (int l = first_shared(tx, spec); l < s.num_tx; ++l) write_block(w, s, l, d);
  return w;
}

std::vector<Mat> sample_channels(int tx, const ChannelDraw& draw, int count, const ConditionalModel& model,
                                 RngStream& rng) {
  const Mat mean = model.posterior_mean(tx, draw.estimates[tx]);
  if (model.scenario().csi_quality[tx] == 0) return {mean};
  RngStream stream = rng.fork({stream_id(StrategyStream::ChannelSamples), static_cast<std::uint64_t>(tx)});
  std::vector<Mat> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(model.sample_channel_given(tx, mean, stream));
  return out;
}

/// `count` draws of TX l's estimation error E (columns CN(0, Upsilon^(l))).
std::vector<Mat> sample_errors(int tx_from, int tx_l, int count, const ConditionalModel& model, RngStream& rng) {
  const Scenario& s = model.scenario();
  RngStream stream = rng.fork({stream_id(StrategyStream::EstimateSamples), static_cast<std::uint64_t>(tx_from),
                               static_cast<std::uint64_t>(tx_l)});
  const Mat& f = model.error_factor(tx_l);
  std::vector<Mat> out;
  for (int o = 0; o < count; ++o) {
    Mat e(s.total_antennas(), s.num_rx);
    for (int k = 0; k < s.num_rx; ++k) e.col(k) = f * standard_complex_normal<double>(f.cols(), stream);
    out.push_back(std::move(e));
  }
  return out;
}

Mat coupled_estimate(const Mat& channel, const Mat& error, double eps) {
  if (eps == 0) return channel;
  return std::sqrt(1 - eps * eps) * channel + eps * error;
}

double rate(const Mat& channel, const Mat& w, double noise) {
  const Mat gains = channel.adjoint() * w;
  return sum_rate_from_gains(gains, noise);
}

}  // namespace

std::vector<double> StrategySpec::uniform_alpha_grid(int points) {
  if (points < 1) throw ConfigError("alpha_grid_size", "must be at least 1");
  if (points == 1) return {1.0};
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = static_cast<double>(i) / (points - 1);
  return g;
}

void StrategySpec::validate(const Scenario& scenario) const {
  if (alpha_grid.empty()) throw ConfigError("alpha_grid", "empty");
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    if (!(alpha_grid[i] >= 0 && alpha_grid[i] <= 1)) throw ConfigError("alpha_grid", "values must lie in [0, 1]");
    if (i > 0 && !(alpha_grid[i] > alpha_grid[i - 1])) throw ConfigError("alpha_grid", "must be strictly ascending");
  }
  if (inner_samples < 1) throw ConfigError("inner_samples", "must be at least 1");
  if (outer_samples < 1) throw ConfigError("outer_samples", "must be at least 1");
  if (approach == Approach::Optimal && (scenario.num_tx != 2 || scenario.csi_quality[1] != 0))
    throw CapabilityError("optimal approach is implemented for two TXs with perfect CSI at TX 2 only");
}

std::string StrategySpec::label() const {
  if (approach == Approach::PerfectCentralized) return "PC";
  std::string a;
  switch (approach) {
    case Approach::Naive: a = "NA"; break;
    case Approach::LocallyRobust: a = "LR"; break;
    case Approach::GloballyRobust: a = "GR"; break;
    case Approach::Optimal: a = "OPT"; break;
    case Approach::PerfectCentralized: break;
  }
  return a + (hierarchy == Hierarchy::Hierarchical ? "-h" : "-nh");
}

StrategySpec parse_strategy_label(const std::string& label, const StrategySpec& base) {
  StrategySpec spec = base;
  if (label == "PC") {
    spec.approach = Approach::PerfectCentralized;
    spec.hierarchy = Hierarchy::Hierarchical;
    return spec;
  }
  const auto dash = label.find('-');
  if (dash == std::string::npos) throw ConfigError("strategies", "bad strategy label '" + label + "'");
  const std::string a = label.substr(0, dash);
  const std::string h = label.substr(dash + 1);
  if (a == "NA") spec.approach = Approach::Naive;
  else if (a == "LR") spec.approach = Approach::LocallyRobust;
  else if (a == "GR") spec.approach = Approach::GloballyRobust;
  else if (a == "OPT") spec.approach = Approach::Optimal;
  else throw ConfigError("strategies", "unknown approach in '" + label + "'");
  if (h == "h") spec.hierarchy = Hierarchy::Hierarchical;
  else if (h == "nh") spec.hierarchy = Hierarchy::NonHierarchical;
  else throw ConfigError("strategies", "unknown hierarchy in '" + label + "'");
  return spec;
}

GridChoice alpha_naive(int tx, const ChannelDraw& draw, const std::vector<double>& prior_alphas,
                       const StrategySpec& spec, const Scenario& s) {
  check_tx(tx, prior_alphas, spec, s);
  const Mat known = known_blocks(draw, prior_alphas, s);
  return grid_argmax(spec.alpha_grid, [&](double alpha) {
    return guarded([&] {
      return rate(draw.estimates[tx], shared_estimate_precoder(tx, draw, known, alpha, spec, s), s.noise_power);
    });
  });
}

GridChoice alpha_locally_robust_on(int tx, const ChannelDraw& draw, const std::vector<double>& prior_alphas,
                                   const StrategySpec& spec, const Scenario& s,
                                   const std::vector<Mat>& channel_samples) {
  check_tx(tx, prior_alphas, spec, s);
  if (channel_samples.empty()) throw ConfigError("inner_samples", "no channel samples");
  const Mat known = known_blocks(draw, prior_alphas, s);
  return grid_argmax(spec.alpha_grid, [&](double alpha) {
    return guarded([&] {
      const Mat w = shared_estimate_precoder(tx, draw, known, alpha, spec, s);
      double total = 0;
      for (const Mat& h : channel_samples) total += rate(h, w, s.noise_power);
      return total / static_cast<double>(channel_samples.size());
    });
  });
}

GridChoice alpha_locally_robust(int tx, const ChannelDraw& draw, const std::vector<double>& prior_alphas,
                                const StrategySpec& spec, const ConditionalModel& model, RngStream& rng) {
  const auto samples = sample_channels(tx, draw, spec.inner_samples, model, rng);
  return alpha_locally_robust_on(tx, draw, prior_alphas, spec, model.scenario(), samples);
}

GridChoice alpha_globally_robust(int tx, const ChannelDraw& draw, const std::vector<double>& prior_alphas,
                                 const StrategySpec& spec, const ConditionalModel& model, RngStream& rng) {
  const Scenario& s = model.scenario();
  check_tx(tx, prior_alphas, spec, s);
  const Mat known = known_blocks(draw, prior_alphas, s);

  // TXs whose estimates TX `tx` does not know.
  std::vector<int> unknown;
  for (int l = 0; l < s.num_tx; ++l)
    if (l != tx && (spec.hierarchy == Hierarchy::NonHierarchical || l > tx)) unknown.push_back(l);
  bool outer_random = false;
  for (int l : unknown) outer_random = outer_random || s.csi_quality[l] > 0;
  const int outer = outer_random ? spec.outer_samples : 1;

  const auto channels = sample_channels(tx, draw, spec.inner_samples, model, rng);
  // errors[i][o]: error draw o for unknown[i]; crossed with every channel sample.
  std::vector<std::vector<Mat>> errors;
  for (int l : unknown) errors.push_back(sample_errors(tx, l, outer, model, rng));

  // estimates[(o * S + c) * U + i]: TX unknown[i]'s estimate for pair (o, c).
  std::vector<Mat> estimates;
  estimates.reserve(static_cast<std::size_t>(outer) * channels.size() * unknown.size());
  for (int o = 0; o < outer; ++o)
    for (const Mat& h : channels)
      for (std::size_t i = 0; i < unknown.size(); ++i)
        estimates.push_back(coupled_estimate(h, errors[i][o], s.csi_quality[unknown[i]]));

  // Everything that does not depend on alpha, per (outer, channel) pair.
  const std::size_t pairs = static_cast<std::size_t>(outer) * channels.size();
  const RzfFamily<double> own(draw.estimates[tx], s);
  std::vector<Mat> base(channels.size());
  std::vector<Mat> own_proj(channels.size());
  for (std::size_t c = 0; c < channels.size(); ++c) {
    base[c] = channels[c].adjoint() * known;
    own_proj[c] = own.project(channels[c], tx);
  }
  std::vector<RzfFamily<double>> families;
  std::vector<Mat> projections;
  families.reserve(estimates.size());
  projections.reserve(estimates.size());
  for (std::size_t idx = 0; idx < estimates.size(); ++idx) {
    const std::size_t c = (idx / unknown.size()) % channels.size();
    const int l = unknown[idx % unknown.size()];
    families.emplace_back(estimates[idx], s);
    projections.push_back(families.back().project(channels[c], l));
  }

  return grid_argmax(spec.alpha_grid, [&](double alpha) {
    return guarded([&] {
      const Mat own_factor = own.right_factor(alpha, tx);
      double total = 0;
      std::size_t idx = 0;
      for (std::size_t p = 0; p < pairs; ++p) {
        const std::size_t c = p % channels.size();
        Mat gains = base[c] + own_proj[c] * own_factor;
        for (int l : unknown) {
          gains.noalias() += projections[idx] * families[idx].right_factor(alpha, l);
          ++idx;
        }
        total += std::log2(rate_product_from_gains(gains, s.noise_power));
      }
      return total / static_cast<double>(pairs);
    });
  });
}

namespace {

void require_two_tx_perfect_second(const Scenario& s) {
  if (s.num_tx != 2 || s.csi_quality[1] != 0)
    throw CapabilityError("optimal approach is implemented for two TXs with perfect CSI at TX 2 only");
}

/// TX `tx`'s gain contributions channel_n^H W_n(alpha) for every grid alpha
/// (empty where the block fails), with W_n built from `family`.
std::vector<std::optional<Mat>> grid_gains(const RzfFamily<double>& family, const Mat& channel, int tx,
                                           const StrategySpec& spec) {
  const Mat proj = family.project(channel, tx);
  std::vector<std::optional<Mat>> out;
  out.reserve(spec.alpha_grid.size());
  for (double alpha : spec.alpha_grid)
    out.push_back(guarded([&]() -> Mat { return proj * family.right_factor(alpha, tx); }));
  return out;
}

/// prod_k (1 + SINR_k) of the gains a + b, without forming the sum.
double rate_product_of_sum(const Mat& a, const Mat& b, double noise, std::vector<double>& interference) {
  const Eigen::Index k_users = a.rows();
  interference.assign(k_users, noise);
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const std::complex<double>* ca = a.col(j).data();
    const std::complex<double>* cb = b.col(j).data();
    for (Eigen::Index k = 0; k < k_users; ++k)
      if (k != j) interference[k] += std::norm(ca[k] + cb[k]);
  }
  double product = 1;
  for (Eigen::Index k = 0; k < k_users; ++k)
    product *= (interference[k] + std::norm(a(k, k) + b(k, k))) / interference[k];
  return product;
}

/// Best rate over the other TX's grid, given one TX's gain contribution.
std::optional<double> best_response_rate(const Mat& fixed, const std::vector<std::optional<Mat>>& responses,
                                         double noise) {
  std::optional<double> best;
  std::vector<double> row;
  for (const auto& g : responses) {
    if (!g) continue;
    const double p = rate_product_of_sum(fixed, *g, noise, row);
    if (!best || p > *best) best = p;
  }
  if (best) best = std::log2(*best);
  return best;
}

/// TX 1 under the optimal rule; identical with or without hierarchy since TX 1
/// knows no other estimate.
GridChoice optimal_first_tx(const ChannelDraw& draw, const StrategySpec& spec, const ConditionalModel& model,
                            RngStream& rng) {
  const Scenario& s = model.scenario();
  const std::size_t grid = spec.alpha_grid.size();
  const auto channels = sample_channels(0, draw, spec.inner_samples, model, rng);
  const RzfFamily<double> first(draw.estimates[0], s);

  std::vector<double> total(grid, 0.0);
  std::vector<bool> valid(grid, true);
  for (const Mat& h : channels) {
    const auto gains_1 = grid_gains(first, h, 0, spec);
    const auto gains_2 = grid_gains(RzfFamily<double>(h, s), h, 1, spec);
    for (std::size_t i = 0; i < grid; ++i) {
      if (!valid[i]) continue;
      const auto r = gains_1[i] ? best_response_rate(*gains_1[i], gains_2, s.noise_power) : std::nullopt;
      if (!r) valid[i] = false;
      else total[i] += *r;
    }
  }
  std::size_t idx = 0;
  return grid_argmax(spec.alpha_grid, [&](double) -> std::optional<double> {
    const std::size_t i = idx++;
    if (!valid[i]) return std::nullopt;
    return total[i] / static_cast<double>(channels.size());
  });
}

/// TX 2 best response at the true channel to TX 1's actual block.
GridChoice best_response_second_tx(const ChannelDraw& draw, const Mat& w1, const StrategySpec& spec,
                                   const Scenario& s) {
  const Mat& h = draw.true_channel;
  Mat w = Mat::Zero(s.total_antennas(), s.num_rx);
  w.topRows(s.antennas[0]) = w1;
  return grid_argmax(spec.alpha_grid, [&](double alpha) {
    return guarded([&] {
      write_block(w, s, 1, rzf_direction<double>(h, alpha));
      return rate(h, w, s.noise_power);
    });
  });
}

}  // namespace

std::pair<GridChoice, GridChoice> alpha_optimal_2tx(const ChannelDraw& draw, const StrategySpec& spec,
                                                    const ConditionalModel& model, RngStream& rng) {
  const Scenario& s = model.scenario();
  require_two_tx_perfect_second(s);
  const GridChoice first = optimal_first_tx(draw, spec, model, rng);
  const Mat w1 = rzf_block<double>(draw.estimates[0], first.alpha, 0, s).weights;
  return {first, best_response_second_tx(draw, w1, spec, s)};
}

std::pair<GridChoice, GridChoice> alpha_optimal_2tx_nonhierarchical(const ChannelDraw& draw,
                                                                    const StrategySpec& spec,
                                                                    const ConditionalModel& model, RngStream& rng) {
  const Scenario& s = model.scenario();
  require_two_tx_perfect_second(s);
  const GridChoice first = optimal_first_tx(draw, spec, model, rng);

  // TX 2 knows H exactly; TX 1's estimate is drawn around it.
  const Mat& h = draw.true_channel;
  const double eps1 = s.csi_quality[0];
  const int outer = eps1 > 0 ? spec.outer_samples : 1;
  const auto errors = sample_errors(1, 0, outer, model, rng);

  std::vector<std::vector<std::optional<Mat>>> gains_1;
  for (int o = 0; o < outer; ++o)
    gains_1.push_back(grid_gains(RzfFamily<double>(coupled_estimate(h, errors[o], eps1), s), h, 0, spec));
  const auto gains_2 = grid_gains(RzfFamily<double>(h, s), h, 1, spec);
  std::size_t j = 0;
  const GridChoice second = grid_argmax(spec.alpha_grid, [&](double) -> std::optional<double> {
    const auto& g2 = gains_2[j++];
    if (!g2) return std::nullopt;
    double total = 0;
    for (int o = 0; o < outer; ++o) {
      const auto r = best_response_rate(*g2, gains_1[o], s.noise_power);
      if (!r) return std::nullopt;
      total += *r;
    }
    return total / outer;
  });
  return {first, second};
}

GridChoice alpha_perfect_centralized(const ChannelDraw& draw, const StrategySpec& spec, const Scenario& s) {
  return grid_argmax(spec.alpha_grid, [&](double alpha) {
    return guarded([&] {
      const Mat d = rzf_direction<double>(draw.true_channel, alpha);
      Mat w(s.total_antennas(), s.num_rx);
      for (int n = 0; n < s.num_tx; ++n) write_block(w, s, n, d);
      return rate(draw.true_channel, w, s.noise_power);
    });
  });
}

TeamDecision run_team(const ChannelDraw& draw, const StrategySpec& spec, const ConditionalModel& model,
                      RngStream& rng) {
  const Scenario& s = model.scenario();
  spec.validate(s);
  TeamDecision out;
  std::vector<PrecoderBlock<double>> blocks;

  switch (spec.approach) {
    case Approach::PerfectCentralized: {
      const GridChoice c = alpha_perfect_centralized(draw, spec, s);
      out.alphas.assign(s.num_tx, c.alpha);
      out.objective_values.assign(s.num_tx, c.objective);
      blocks = rzf_blocks<double>(draw.true_channel, c.alpha, s);
      out.precoder = assemble(std::move(blocks));
      return out;
    }
    case Approach::Optimal: {
      const auto [first, second] = spec.hierarchy == Hierarchy::Hierarchical
                                       ? alpha_optimal_2tx(draw, spec, model, rng)
                                       : alpha_optimal_2tx_nonhierarchical(draw, spec, model, rng);
      out.alphas = {first.alpha, second.alpha};
      out.objective_values = {first.objective, second.objective};
      break;
    }
    default: {
      for (int n = 0; n < s.num_tx; ++n) {
        std::vector<double> prior;
        if (spec.hierarchy == Hierarchy::Hierarchical) prior = out.alphas;
        GridChoice c;
        if (spec.approach == Approach::Naive) c = alpha_naive(n, draw, prior, spec, s);
        else if (spec.approach == Approach::LocallyRobust) c = alpha_locally_robust(n, draw, prior, spec, model, rng);
        else c = alpha_globally_robust(n, draw, prior, spec, model, rng);
        out.alphas.push_back(c.alpha);
        out.objective_values.push_back(c.objective);
      }
      break;
    }
  }
  for (int n = 0; n < s.num_tx; ++n) blocks.push_back(rzf_block<double>(draw.estimates[n], out.alphas[n], n, s));
  out.precoder = assemble(std::move(blocks));
  return out;
}

}  // namespace dcsi
