#ifndef DCSI_RNG_HPP
#define DCSI_RNG_HPP

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

namespace dcsi {

/// Deterministic random stream addressed by (master seed, path).
///
/// The engine seed is a SplitMix64 hash chain over the master seed and each
/// path element, so the sequence depends only on the address and never on
/// which thread or in which order streams are created. Streams are cheap to
/// fork and must not be shared between threads.
class RngStream {
 public:
  /// Recorded in run manifests; bump when the derivation or engine changes.
  static constexpr std::string_view kAlgorithm =
      "mt19937_64 seeded by splitmix64(path-chain) v1; std::normal_distribution<double>";

  explicit RngStream(std::uint64_t master_seed, std::vector<std::uint64_t> path = {});

  /// Child stream with `id` appended to the path.
  RngStream fork(std::uint64_t id) const;
  RngStream fork(std::initializer_list<std::uint64_t> ids) const;

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  const std::vector<std::uint64_t>& path() const noexcept { return path_; }

  double standard_normal();
  /// CN(0, 1): independent real and imaginary parts with variance 1/2 each.
  std::complex<double> complex_normal();
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::uint64_t master_seed_;
  std::vector<std::uint64_t> path_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace dcsi

#endif  // DCSI_RNG_HPP
