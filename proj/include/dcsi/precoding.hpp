#ifndef DCSI_PRECODING_HPP
#define DCSI_PRECODING_HPP

#include <cmath>
#include <vector>

#include "dcsi/errors.hpp"
#include "dcsi/linalg.hpp"
#include "dcsi/scenario.hpp"

namespace dcsi {

/// One TX's M_n x K precoding submatrix, normalized to ||weights||_F^2 = power.
template <typename Real>
struct PrecoderBlock {
  int tx = 0;
  CMatrix<Real> weights;
  Real power = 0;
};

/// Network-wide M x K precoder, blocks stacked in TX order.
template <typename Real>
struct NetworkPrecoder {
  CMatrix<Real> weights;
  std::vector<PrecoderBlock<Real>> blocks;
};

/// Unnormalized RZF direction estimate ((1-alpha) estimate^H estimate + alpha I)^{-1}.
///
/// Solves the K x K Hermitian system instead of forming the inverse. Throws
/// NumericalDomainError when the regularized Gram matrix is singular, which
/// can only happen at alpha = 0 with a rank-deficient estimate.
template <typename Real>
CMatrix<Real> rzf_direction(const CMatrix<Real>& estimate, Real alpha) {
  if (!(alpha >= 0 && alpha <= 1)) throw NumericalDomainError("rzf: alpha outside [0, 1]");
  const Eigen::Index k = estimate.cols();
  CMatrix<Real> gram = CMatrix<Real>::Identity(k, k) * alpha;
  gram.template selfadjointView<Eigen::Lower>().rankUpdate(estimate.adjoint(), Real(1) - alpha);
  Eigen::LLT<CMatrix<Real>, Eigen::Lower> llt(gram);
  if (llt.info() != Eigen::Success || !(llt.rcond() > Real(1e-13)))
    throw NumericalDomainError("rzf: regularized Gram matrix is singular");
  return llt.solve(estimate.adjoint()).adjoint();
}

/// Scales `direction` to Frobenius norm sqrt(power).
template <typename Real, typename Derived>
PrecoderBlock<Real> normalize_block(const Eigen::MatrixBase<Derived>& direction, int tx, Real power) {
  const Real norm = direction.norm();
  if (!(norm > 0) || !std::isfinite(norm))
    throw DegeneratePrecoderError("rzf: TX " + std::to_string(tx) + " block has zero or non-finite norm");
  return PrecoderBlock<Real>{tx, direction * (std::sqrt(power) / norm), power};
}

/// TX n's RZF block built from `estimate` (M x K) with regularization `alpha`.
template <typename Real>
PrecoderBlock<Real> rzf_block(const CMatrix<Real>& estimate, Real alpha, int tx, const Scenario& scenario) {
  if (estimate.rows() != scenario.total_antennas())
    throw StructuralError("rzf_block: estimate has " + std::to_string(estimate.rows()) + " rows, expected M");
  const CMatrix<Real> f = rzf_direction(estimate, alpha);
  return normalize_block(f.middleRows(scenario.row_offset(tx), scenario.antennas[tx]), tx,
                         Real(scenario.power_budgets[tx]));
}

/// Every TX's block from one shared estimate and alpha (one linear solve).
template <typename Real>
std::vector<PrecoderBlock<Real>> rzf_blocks(const CMatrix<Real>& estimate, Real alpha, const Scenario& scenario) {
  if (estimate.rows() != scenario.total_antennas()) throw StructuralError("rzf_blocks: estimate must have M rows");
  const CMatrix<Real> f = rzf_direction(estimate, alpha);
  std::vector<PrecoderBlock<Real>> out;
  for (int n = 0; n < scenario.num_tx; ++n)
    out.push_back(normalize_block(f.middleRows(scenario.row_offset(n), scenario.antennas[n]), n,
                                  Real(scenario.power_budgets[n])));
  return out;
}

/// Stacks blocks vertically; blocks must be given for TX 0..N-1 in order.
template <typename Real>
NetworkPrecoder<Real> assemble(std::vector<PrecoderBlock<Real>> blocks) {
  if (blocks.empty()) throw StructuralError("assemble: no blocks");
  const Eigen::Index k = blocks.front().weights.cols();
  Eigen::Index rows = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].tx != static_cast<int>(i)) throw StructuralError("assemble: blocks out of TX order");
    if (blocks[i].weights.cols() != k) throw StructuralError("assemble: blocks disagree on K");
    rows += blocks[i].weights.rows();
  }
  NetworkPrecoder<Real> out;
  out.weights.resize(rows, k);
  Eigen::Index r = 0;
  for (const auto& b : blocks) {
    out.weights.middleRows(r, b.weights.rows()) = b.weights;
    r += b.weights.rows();
  }
  out.blocks = std::move(blocks);
  return out;
}

/// RZF directions of one estimate for many alphas.
///
/// With estimate^H estimate = V diag(lambda) V^H, the direction at alpha is
/// (estimate V) diag(d) V^H with d_j = 1 / ((1-alpha) lambda_j + alpha), so
/// after one K x K eigendecomposition each alpha costs a diagonal scaling.
/// Gains against a channel reduce to K x K products via `project`.
template <typename Real>
class RzfFamily {
 public:
  RzfFamily(const CMatrix<Real>& estimate, const Scenario& scenario) : scenario_(&scenario) {
    if (estimate.rows() != scenario.total_antennas()) throw StructuralError("RzfFamily: estimate must have M rows");
    const CMatrix<Real> gram = estimate.adjoint() * estimate;
    Eigen::SelfAdjointEigenSolver<CMatrix<Real>> eig(gram);
    if (eig.info() != Eigen::Success) throw NumericalDomainError("RzfFamily: eigendecomposition failed");
    v_ = eig.eigenvectors();
    lambda_ = eig.eigenvalues().cwiseMax(Real(0));
    rotated_ = estimate * v_;
    col_energy_.resize(scenario.num_tx);
    for (int n = 0; n < scenario.num_tx; ++n)
      col_energy_[n] = rotated_.middleRows(scenario.row_offset(n), scenario.antennas[n]).colwise().squaredNorm();
  }

  /// d(alpha); throws NumericalDomainError where the LLT path would find the
  /// regularized Gram matrix singular.
  RVector<Real> spectrum(Real alpha) const {
    if (!(alpha >= 0 && alpha <= 1)) throw NumericalDomainError("rzf: alpha outside [0, 1]");
    const RVector<Real> denom = (Real(1) - alpha) * lambda_.array() + alpha;
    if (!(denom.minCoeff() > Real(1e-13) * denom.maxCoeff()))
      throw NumericalDomainError("rzf: regularized Gram matrix is singular");
    return denom.cwiseInverse();
  }

  /// sqrt(P_n) / ||direction block n||_F for spectrum d.
  Real block_scale(const RVector<Real>& d, int tx) const {
    const Real norm = std::sqrt(col_energy_[tx].dot(d.cwiseAbs2()));
    if (!(norm > 0) || !std::isfinite(norm))
      throw DegeneratePrecoderError("rzf: TX " + std::to_string(tx) + " block has zero or non-finite norm");
    return std::sqrt(Real(scenario_->power_budgets[tx])) / norm;
  }

  /// K x K factor R with normalized block n = (estimate V)_n R.
  CMatrix<Real> right_factor(Real alpha, int tx) const {
    const RVector<Real> d = spectrum(alpha);
    return block_scale(d, tx) * d.asDiagonal() * v_.adjoint();
  }

  /// channel_n^H (estimate V)_n, so that channel_n^H block_n = project(channel, n) * right_factor(alpha, n).
  CMatrix<Real> project(const CMatrix<Real>& channel, int tx) const {
    const int off = scenario_->row_offset(tx);
    const int rows = scenario_->antennas[tx];
    return channel.middleRows(off, rows).adjoint() * rotated_.middleRows(off, rows);
  }

  /// Normalized M_n x K block of TX n.
  CMatrix<Real> block(Real alpha, int tx) const {
    return rotated_.middleRows(scenario_->row_offset(tx), scenario_->antennas[tx]) * right_factor(alpha, tx);
  }

 private:
  const Scenario* scenario_;
  CMatrix<Real> v_;
  RVector<Real> lambda_;
  CMatrix<Real> rotated_;
  std::vector<RVector<Real>> col_energy_;
};

/// prod_k (1 + SINR_k); log2 of it is the sum rate. Cheaper when only the
/// ordering of rates matters.
template <typename Derived>
typename Derived::RealScalar rate_product_from_gains(const Eigen::MatrixBase<Derived>& gains,
                                                     typename Derived::RealScalar noise_power) {
  using Real = typename Derived::RealScalar;
  Real product = 1;
  for (Eigen::Index k = 0; k < gains.rows(); ++k) {
    Real interference = noise_power;
    for (Eigen::Index j = 0; j < gains.cols(); ++j)
      if (j != k) interference += std::norm(gains(k, j));
    product *= (interference + std::norm(gains(k, k))) / interference;
  }
  return product;
}

/// Sum rate from the K x K matrix of effective gains G(k, j) = h_k^H w_j.
template <typename Derived>
typename Derived::RealScalar sum_rate_from_gains(const Eigen::MatrixBase<Derived>& gains,
                                                 typename Derived::RealScalar noise_power) {
  using Real = typename Derived::RealScalar;
  Real rate = 0;
  for (Eigen::Index k = 0; k < gains.rows(); ++k) {
    Real interference = noise_power;
    for (Eigen::Index j = 0; j < gains.cols(); ++j)
      if (j != k) interference += std::norm(gains(k, j));
    rate += std::log2(Real(1) + std::norm(gains(k, k)) / interference);
  }
  return rate;
}

/// sum_k log2(1 + |h_k^H w_k|^2 / (sum_{j != k} |h_k^H w_j|^2 + noise)).
template <typename Real>
Real sum_rate(const CMatrix<Real>& channel, const CMatrix<Real>& precoder, Real noise_power) {
  if (!(noise_power > 0)) throw NumericalDomainError("sum_rate: noise power must be positive");
  if (channel.rows() != precoder.rows() || channel.cols() != precoder.cols())
    throw StructuralError("sum_rate: channel and precoder shapes differ");
  const CMatrix<Real> gains = channel.adjoint() * precoder;
  return sum_rate_from_gains(gains, noise_power);
}

}  // namespace dcsi

#endif  // DCSI_PRECODING_HPP
