#include "dcsi/reference.hpp"

#include <cmath>
#include <limits>

namespace dcsi::reference {
namespace {

using Mat = Eigen::MatrixXcd;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Mat stack(const Mat& top, const Mat& bottom) {
  Mat w(top.rows() + bottom.rows(), top.cols());
  w << top, bottom;
  return w;
}

}  // namespace

double sum_rate_loops(const Mat& h, const Mat& w, double noise) {
  const Eigen::Index k_users = h.cols();
  double total = 0;
  for (Eigen::Index k = 0; k < k_users; ++k) {
    double signal = 0;
    double interference = 0;
    for (Eigen::Index j = 0; j < k_users; ++j) {
      std::complex<double> g = 0;
      for (Eigen::Index m = 0; m < h.rows(); ++m) g += std::conj(h(m, k)) * w(m, j);
      if (j == k) signal = std::norm(g);
      else interference += std::norm(g);
    }
    total += std::log2(1.0 + signal / (interference + noise));
  }
  return total;
}

Mat rzf_block_inverse(const Mat& est, double alpha, int tx, const Scenario& s) {
  const Eigen::Index k = est.cols();
  const Mat gram = (1 - alpha) * est.adjoint() * est + alpha * Mat::Identity(k, k);
  const Mat b = est.middleRows(s.row_offset(tx), s.antennas[tx]) * gram.inverse();
  return std::sqrt(s.power_budgets[tx]) * b / b.norm();
}

std::vector<double> naive_objective_tx1(const ChannelDraw& draw, const Scenario& s, const std::vector<double>& grid) {
  std::vector<double> out;
  const Mat& est = draw.estimates[0];
  for (double a : grid) {
    if (a == 0 && est.cols() > est.rows()) {
      out.push_back(kNegInf);
      continue;
    }
    const Mat w = stack(rzf_block_inverse(est, a, 0, s), rzf_block_inverse(est, a, 1, s));
    out.push_back(sum_rate_loops(est, w, s.noise_power));
  }
  return out;
}

std::vector<double> locally_robust_objective_tx1(const ChannelDraw& draw, const Scenario& s,
                                                 const std::vector<double>& grid, const std::vector<Mat>& samples) {
  std::vector<double> out;
  const Mat& est = draw.estimates[0];
  for (double a : grid) {
    const Mat w = stack(rzf_block_inverse(est, a, 0, s), rzf_block_inverse(est, a, 1, s));
    double acc = 0;
    for (const Mat& h : samples) acc += sum_rate_loops(h, w, s.noise_power);
    out.push_back(acc / static_cast<double>(samples.size()));
  }
  return out;
}

std::vector<double> globally_robust_objective_tx1(const ChannelDraw& draw, const Scenario& s,
                                                  const std::vector<double>& grid, const std::vector<Mat>& samples) {
  std::vector<double> out;
  for (double a : grid) {
    const Mat w1 = rzf_block_inverse(draw.estimates[0], a, 0, s);
    double acc = 0;
    // TX 2 has perfect CSI, so its drawn estimate is the drawn channel.
    for (const Mat& h : samples) acc += sum_rate_loops(h, stack(w1, rzf_block_inverse(h, a, 1, s)), s.noise_power);
    out.push_back(acc / static_cast<double>(samples.size()));
  }
  return out;
}

std::vector<double> optimal_objective_tx1(const ChannelDraw& draw, const Scenario& s, const std::vector<double>& grid,
                                          const std::vector<Mat>& samples) {
  std::vector<double> out;
  for (double a1 : grid) {
    const Mat w1 = rzf_block_inverse(draw.estimates[0], a1, 0, s);
    double acc = 0;
    for (const Mat& h : samples) {
      double best = kNegInf;
      for (double a2 : grid) best = std::max(best, sum_rate_loops(h, stack(w1, rzf_block_inverse(h, a2, 1, s)), s.noise_power));
      acc += best;
    }
    out.push_back(acc / static_cast<double>(samples.size()));
  }
  return out;
}

std::vector<double> best_response_objective_tx2(const ChannelDraw& draw, const Mat& w1, const Scenario& s,
                                                const std::vector<double>& grid) {
  std::vector<double> out;
  for (double a2 : grid)
    out.push_back(sum_rate_loops(draw.true_channel, stack(w1, rzf_block_inverse(draw.true_channel, a2, 1, s)),
                                 s.noise_power));
  return out;
}

std::size_t first_argmax(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

PosteriorFormula posterior_formula(const Mat& prior, const Mat& error_cov, double eps) {
  const double keep = 1 - eps * eps;
  const Mat a_inv = (keep * prior + eps * eps * error_cov).inverse();
  return {std::sqrt(keep) * prior * a_inv, prior - keep * prior * a_inv * prior};
}

}  // namespace dcsi::reference
