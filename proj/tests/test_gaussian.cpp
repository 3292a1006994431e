#include <cmath>

#include "doctest.h"

#include "dcsi/gaussian.hpp"
#include "dcsi/reference.hpp"
#include "dcsi/stochastics.hpp"

using namespace dcsi;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

namespace {

Mat random_psd(int m, RngStream& rng) {
  Mat a(m, m);
  for (int i = 0; i < m * m; ++i) a.data()[i] = rng.complex_normal();
  return hermitian_part(Mat(a * a.adjoint() / double(m) + 0.2 * Mat::Identity(m, m)));
}

}  // namespace

TEST_CASE("psd_factor reproduces full-rank and singular matrices") {
  RngStream rng(1);
  const Mat s = random_psd(5, rng);
  const Mat l = psd_factor<double>(s);
  CHECK((l * l.adjoint() - s).norm() < 1e-12);

  Vec v(3);
  v << 1.0, std::complex<double>(0, 2), -1.0;
  const Mat rank_one = v * v.adjoint();
  const Mat f = psd_factor<double>(rank_one);
  CHECK((f * f.adjoint() - rank_one).norm() < 1e-12);

  CHECK(psd_factor<double>(Mat::Zero(3, 3)).norm() == 0.0);
}

TEST_CASE("psd_factor rejects bad input") {
  Mat asym = Mat::Identity(2, 2);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(psd_factor<double>(asym), NumericalDomainError);
  Mat indefinite = Mat::Identity(2, 2);
  indefinite(1, 1) = -1;
  CHECK_THROWS_AS(psd_factor<double>(indefinite), NumericalDomainError);
  // Rounding-level negativity is clamped.
  Mat nearly = Mat::Identity(2, 2);
  nearly(1, 1) = -1e-14;
  CHECK_NOTHROW(psd_factor<double>(nearly));
}

TEST_CASE("posterior with identity covariances") {
  const double eps = 0.6;
  Vec est(3);
  est << 1.0, std::complex<double>(0.5, -1), 2.0;
  const auto post = conditional_h_given_estimate<double>(est, Mat::Identity(3, 3), Mat::Identity(3, 3), eps);
  CHECK((post.mean - std::sqrt(1 - eps * eps) * est).norm() < 1e-14);
  CHECK((post.covariance - eps * eps * Mat::Identity(3, 3)).norm() < 1e-14);
}

TEST_CASE("posterior edge cases") {
  RngStream rng(2);
  const Mat prior = random_psd(4, rng);
  const Mat ups = random_psd(4, rng);
  Vec est(4);
  for (int i = 0; i < 4; ++i) est(i) = rng.complex_normal();

  const auto exact = conditional_h_given_estimate<double>(est, prior, ups, 0.0);
  CHECK(exact.mean == est);
  CHECK(exact.covariance.norm() == 0.0);

  const auto blind = conditional_h_given_estimate<double>(est, prior, ups, 1.0);
  CHECK(blind.mean.norm() < 1e-12);
  CHECK((blind.covariance - prior).norm() < 1e-12 * prior.norm());

  for (double eps : {1e-6, 0.3, 0.9}) {
    const EstimatePosterior<double> post(prior, ups, eps);
    const auto f = reference::posterior_formula(prior, ups, eps);
    CHECK((post.gain() - f.gain).norm() < 1e-10 * f.gain.norm());
    // The explicit formula cancels badly for tiny eps, hence the absolute scale.
    CHECK((post.covariance() - f.covariance).norm() < 1e-10 * prior.norm());
    Eigen::SelfAdjointEigenSolver<Mat> eig(post.covariance());
    CHECK(eig.eigenvalues().minCoeff() > -1e-12 * prior.norm());
  }
}

TEST_CASE("estimate given estimate composes the two noise stages") {
  // eps_n^2 = 1/2 and eps_l^2 = 1/4 with identity statistics:
  // covariance (3/4)(1/2) + 1/4 = 5/8.
  Vec est = Vec::Ones(2);
  const auto cond_n = conditional_h_given_estimate<double>(est, Mat::Identity(2, 2), Mat::Identity(2, 2),
                                                           std::sqrt(0.5));
  const auto cond_l = conditional_estimate_given_estimate<double>(cond_n, Mat::Identity(2, 2), 0.5);
  CHECK((cond_l.covariance - 0.625 * Mat::Identity(2, 2)).norm() < 1e-14);
  CHECK((cond_l.mean - std::sqrt(0.75) * std::sqrt(0.5) * est).norm() < 1e-14);
}

TEST_CASE("sampled moments of a conditional Gaussian") {
  RngStream rng(3);
  const Mat cov = random_psd(3, rng);
  Vec mean(3);
  mean << 1.0, -2.0, std::complex<double>(0, 1);
  const auto g = make_conditional<double>(mean, cov);
  const int n = 200000;
  Mat x(3, n);
  for (int i = 0; i < n; ++i) x.col(i) = sample_conditional(g, rng);
  const Vec m = x.rowwise().mean();
  const Mat c = (x.colwise() - m) * (x.colwise() - m).adjoint() / double(n);
  CHECK((m - mean).norm() < 0.02 * std::sqrt(cov.trace().real()));
  CHECK((c - cov).norm() < 0.02 * cov.norm());
}

TEST_CASE("complex normal has unit variance split evenly") {
  RngStream rng(4);
  double re2 = 0, im2 = 0, cross = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const auto z = rng.complex_normal();
    re2 += z.real() * z.real();
    im2 += z.imag() * z.imag();
    cross += z.real() * z.imag();
  }
  CHECK(re2 / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(im2 / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(cross / n) < 0.01);
}

TEST_CASE("rng streams depend only on their address") {
  RngStream a(9, {1, 2});
  RngStream b = RngStream(9, {1}).fork(2);
  for (int i = 0; i < 5; ++i) CHECK(a.next_u64() == b.next_u64());
  RngStream c(9, {2, 1});
  CHECK(RngStream(9, {1, 2}).next_u64() != c.next_u64());
}

TEST_CASE("sampled estimates with perfect CSI copy the channel") {
  const Scenario s = with_csi_quality(build_default_scenario(), {0.5, 0.0});
  const CovarianceSet covs = assemble_covariances(s);
  RngStream rng(5);
  const Mat h = sample_channel(covs, rng);
  const ChannelDraw d = sample_estimates(h, s, rng);
  CHECK(d.estimates[1] == h);
  CHECK((d.estimates[0] - std::sqrt(0.75) * h - 0.5 * d.error_draws[0]).norm() < 1e-12);
}
