#ifndef DCSI_ARRAY_HPP
#define DCSI_ARRAY_HPP

#include <cmath>
#include <numbers>

#include "dcsi/linalg.hpp"

namespace dcsi {

/// ULA response toward angle `theta` (radians from the array axis).
/// Entry m is exp(-j 2 pi m delta cos(theta)); entry 0 is exactly 1.
template <typename Real>
CVector<Real> steering_vector(Real theta, int num_antennas, Real spacing_ratio) {
  CVector<Real> a(num_antennas);
  const Real phase_step = -Real(2) * std::numbers::pi_v<Real> * spacing_ratio * std::cos(theta);
  a(0) = Complex<Real>(1, 0);
  for (int m = 1; m < num_antennas; ++m) a(m) = std::polar(Real(1), phase_step * Real(m));
  return a;
}

/// Spatial covariance beta^2 E[a(theta) a(theta)^H] with theta uniform on
/// [mean - spread, mean + spread], integrated with a `quadrature_points`-point
/// midpoint rule.
template <typename Real>
CMatrix<Real> link_covariance(Real mean_aod, Real angle_spread, Real attenuation,
                              int num_antennas, Real spacing_ratio, int quadrature_points) {
  CMatrix<Real> acc = CMatrix<Real>::Zero(num_antennas, num_antennas);
  const Real width = Real(2) * angle_spread / Real(quadrature_points);
  for (int q = 0; q < quadrature_points; ++q) {
    const Real theta = mean_aod - angle_spread + (Real(q) + Real(0.5)) * width;
    const CVector<Real> a = steering_vector(theta, num_antennas, spacing_ratio);
    acc.noalias() += a * a.adjoint();
  }
  acc *= attenuation * attenuation / Real(quadrature_points);
  // Exact Hermitian symmetry and a real diagonal.
  return hermitian_part(acc);
}

}  // namespace dcsi

#endif  // DCSI_ARRAY_HPP
