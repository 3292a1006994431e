#ifndef DCSI_ERRORS_HPP
#define DCSI_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dcsi {

/// Bad configuration value or unknown key. `field()` names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Input outside the numerical domain of an operation (non-Hermitian, indefinite, singular).
class NumericalDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// RZF block with zero Frobenius norm before normalization.
class DegeneratePrecoderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration the implementation does not support.
class CapabilityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Inconsistent shapes when combining pieces.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace dcsi

#endif  // DCSI_ERRORS_HPP
