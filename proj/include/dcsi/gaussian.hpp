#ifndef DCSI_GAUSSIAN_HPP
#define DCSI_GAUSSIAN_HPP

#include <cmath>
#include <string>

#include "dcsi/errors.hpp"
#include "dcsi/linalg.hpp"
#include "dcsi/rng.hpp"

namespace dcsi {

/// Default relative tolerance for negative eigenvalues in psd_factor.
inline constexpr double kClampTolerance = 1e-10;

/// Returns L with L L^H = sigma, via eigendecomposition with negative
/// eigenvalues clamped to zero. Works for singular sigma.
///
/// Throws NumericalDomainError when sigma is not Hermitian within 1e-10 or an
/// eigenvalue is below -clamp_tol * trace(sigma).
template <typename Real>
CMatrix<Real> psd_factor(const CMatrix<Real>& sigma, Real clamp_tol = Real(kClampTolerance)) {
  if (sigma.rows() != sigma.cols()) throw NumericalDomainError("psd_factor: matrix is not square");
  if (sigma.size() == 0) return sigma;
  const Real scale = std::max(Real(1), sigma.cwiseAbs().maxCoeff());
  const Real defect = hermitian_defect(sigma);
  if (!(defect <= Real(1e-10) * scale))
    throw NumericalDomainError("psd_factor: matrix is not Hermitian (defect " + std::to_string(defect) + ")");

  const CMatrix<Real> sym = hermitian_part(sigma);
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericalDomainError("psd_factor: eigendecomposition failed");
  const Real trace = sym.trace().real();
  const RVector<Real>& lambda = eig.eigenvalues();
  if (lambda.minCoeff() < -clamp_tol * std::max(trace, Real(0)))
    throw NumericalDomainError("psd_factor: matrix is indefinite (min eigenvalue " +
                               std::to_string(double(lambda.minCoeff())) + ")");
  const RVector<Real> root = lambda.cwiseMax(Real(0)).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

/// CN(mean, covariance) with a precomputed square-root factor.
template <typename Real>
struct ConditionalGaussian {
  CVector<Real> mean;
  CMatrix<Real> covariance;
  CMatrix<Real> factor;  // factor * factor^H == covariance

  Eigen::Index dim() const { return mean.size(); }
  bool degenerate() const { return covariance.size() == 0 || covariance.isZero(0); }
};

template <typename Real>
ConditionalGaussian<Real> make_conditional(CVector<Real> mean, CMatrix<Real> covariance) {
  ConditionalGaussian<Real> g;
  g.factor = psd_factor<Real>(covariance);
  g.mean = std::move(mean);
  g.covariance = hermitian_part(covariance);
  return g;
}

/// Linear-Gaussian posterior of h given an estimate
/// h_hat = sqrt(1 - eps^2) h + eps e, h ~ CN(0, prior), e ~ CN(0, error_cov).
///
/// The posterior covariance does not depend on h_hat, so it and its factor are
/// computed once; `condition` only applies the gain.
template <typename Real>
class EstimatePosterior {
 public:
  EstimatePosterior(const CMatrix<Real>& prior, const CMatrix<Real>& error_cov, Real epsilon) {
    const Eigen::Index m = prior.rows();
    if (prior.cols() != m || error_cov.rows() != m || error_cov.cols() != m)
      throw StructuralError("EstimatePosterior: covariance shapes differ");
    if (!(epsilon >= 0 && epsilon <= 1)) throw NumericalDomainError("EstimatePosterior: epsilon outside [0, 1]");
    const Real scale = std::max(Real(1), prior.cwiseAbs().maxCoeff());
    if (hermitian_defect(prior) > Real(1e-10) * scale)
      throw NumericalDomainError("EstimatePosterior: channel covariance is not Hermitian");
    if (hermitian_defect(error_cov) > Real(1e-10) * std::max(Real(1), error_cov.cwiseAbs().maxCoeff()))
      throw NumericalDomainError("EstimatePosterior: error covariance is not Hermitian");

    if (epsilon == 0) {
      // Perfect CSI: h = h_hat, no uncertainty left.
      gain_ = CMatrix<Real>::Identity(m, m);
      posterior_.covariance = CMatrix<Real>::Zero(m, m);
      posterior_.factor = CMatrix<Real>::Zero(m, m);
      return;
    }
    const Real keep = Real(1) - epsilon * epsilon;
    const Real noise = epsilon * epsilon;
    const CMatrix<Real> inner = hermitian_part(CMatrix<Real>(keep * prior + noise * error_cov));
    Eigen::LLT<CMatrix<Real>> llt(inner);
    if (llt.info() != Eigen::Success || !(llt.rcond() > Real(1e-14)))
      throw NumericalDomainError("EstimatePosterior: (1-eps^2) Sigma + eps^2 Upsilon is singular");

    // gain = sqrt(1-eps^2) Sigma A^{-1}; A Hermitian so Sigma A^{-1} = (A^{-1} Sigma)^H.
    const CMatrix<Real> solved = llt.solve(prior);
    gain_ = std::sqrt(keep) * solved.adjoint();
    // Sigma - (1-eps^2) Sigma A^{-1} Sigma equals eps^2 Sigma A^{-1} Upsilon;
    // the latter avoids cancellation when eps is small.
    const CMatrix<Real> cov = noise * (solved.adjoint() * error_cov);
    posterior_.covariance = hermitian_part(cov);
    posterior_.factor = psd_factor<Real>(posterior_.covariance);
  }

  /// Posterior law of h given `estimate`.
  ConditionalGaussian<Real> condition(const CVector<Real>& estimate) const {
    ConditionalGaussian<Real> out = posterior_;
    out.mean = gain_ * estimate;
    return out;
  }

  CVector<Real> mean(const CVector<Real>& estimate) const { return gain_ * estimate; }
  const CMatrix<Real>& gain() const { return gain_; }
  const CMatrix<Real>& covariance() const { return posterior_.covariance; }
  const CMatrix<Real>& factor() const { return posterior_.factor; }

 private:
  CMatrix<Real> gain_;
  ConditionalGaussian<Real> posterior_;
};

/// Law of h_k given TX n's estimate of it.
template <typename Real>
ConditionalGaussian<Real> conditional_h_given_estimate(const CVector<Real>& estimate, const CMatrix<Real>& prior,
                                                       const CMatrix<Real>& error_cov, Real epsilon) {
  if (estimate.size() != prior.rows()) throw StructuralError("conditional_h_given_estimate: dimension mismatch");
  return EstimatePosterior<Real>(prior, error_cov, epsilon).condition(estimate);
}

/// Law of TX l's estimate given TX n's estimate, built from the law of h
/// given TX n's estimate (`cond_n`) and TX l's error statistics.
template <typename Real>
ConditionalGaussian<Real> conditional_estimate_given_estimate(const ConditionalGaussian<Real>& cond_n,
                                                              const CMatrix<Real>& error_cov_l, Real epsilon_l) {
  if (!(epsilon_l >= 0 && epsilon_l <= 1)) throw NumericalDomainError("epsilon outside [0, 1]");
  if (error_cov_l.rows() != cond_n.dim()) throw StructuralError("conditional_estimate_given_estimate: dimension mismatch");
  const Real keep = Real(1) - epsilon_l * epsilon_l;
  CVector<Real> mean = std::sqrt(keep) * cond_n.mean;
  if (epsilon_l == 0) {
    ConditionalGaussian<Real> out = cond_n;
    out.mean = std::move(mean);
    return out;
  }
  CMatrix<Real> cov = keep * cond_n.covariance + epsilon_l * epsilon_l * error_cov_l;
  return make_conditional<Real>(std::move(mean), std::move(cov));
}

/// Standard circularly-symmetric complex Gaussian vector.
template <typename Real>
CVector<Real> standard_complex_normal(Eigen::Index dim, RngStream& rng) {
  CVector<Real> g(dim);
  for (Eigen::Index i = 0; i < dim; ++i) g(i) = Complex<Real>(rng.complex_normal());
  return g;
}

/// mean + factor * g, g ~ CN(0, I).
template <typename Real>
CVector<Real> sample_conditional(const ConditionalGaussian<Real>& cond, RngStream& rng) {
  const CVector<Real> g = standard_complex_normal<Real>(cond.factor.cols(), rng);
  return cond.mean + cond.factor * g;
}

}  // namespace dcsi

#endif  // DCSI_GAUSSIAN_HPP
