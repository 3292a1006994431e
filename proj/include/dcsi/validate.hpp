#ifndef DCSI_VALIDATE_HPP
#define DCSI_VALIDATE_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace dcsi {

struct ValidationCheck {
  std::string name;
  double measured = 0;
  double tolerance = 0;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool passed() const;
  /// One "PASS|FAIL name measured=... tolerance=..." line per check.
  std::string to_text() const;
};

/// Test hooks that deliberately break an input so the matching check must fail.
struct ValidationHooks {
  bool corrupt_covariance = false;  // makes the posterior check see a non-Hermitian Sigma
};

/// Fast self-checks of the numerical core against independent oracles.
/// Deterministic in `seed`; takes a few seconds.
ValidationReport run_validation(std::uint64_t seed, const ValidationHooks& hooks = {});

}  // namespace dcsi

#endif  // DCSI_VALIDATE_HPP
