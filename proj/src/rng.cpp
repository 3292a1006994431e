#include "dcsi/rng.hpp"

#include <cmath>
#include <numbers>

namespace dcsi {
namespace {

std::uint64_t derive_seed(std::uint64_t master_seed, const std::vector<std::uint64_t>& path) {
  std::uint64_t h = splitmix64(master_seed ^ 0x6a09e667f3bcc909ULL);
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x9e3779b97f4a7c15ULL));
  return h;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t master_seed, std::vector<std::uint64_t> path)
    : master_seed_(master_seed), path_(std::move(path)), engine_(derive_seed(master_seed_, path_)) {}

RngStream RngStream::fork(std::uint64_t id) const {
  auto p = path_;
  p.push_back(id);
  return RngStream(master_seed_, std::move(p));
}

RngStream RngStream::fork(std::initializer_list<std::uint64_t> ids) const {
  auto p = path_;
  p.insert(p.end(), ids.begin(), ids.end());
  return RngStream(master_seed_, std::move(p));
}

double RngStream::standard_normal() { return normal_(engine_); }

constexpr double kInvSqrt2 = 0.70710678118654752440;

std::complex<double> RngStream::complex_normal() {
  const double re = normal_(engine_);
  const double im = normal_(engine_);
  return {re * kInvSqrt2, im * kInvSqrt2};
}

}  // namespace dcsi
