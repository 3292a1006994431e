#include "dcsi/stats.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dcsi {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

SampleSummary summarize(std::span<const double> values) {
  SampleSummary s;
  s.count = values.size();
  if (s.count == 0) return s;
  s.mean = pairwise_sum(values) / static_cast<double>(s.count);
  if (s.count > 1) {
    std::vector<double> sq;
    sq.reserve(s.count);
    for (double v : values) sq.push_back((v - s.mean) * (v - s.mean));
    s.stddev = std::sqrt(pairwise_sum(sq) / static_cast<double>(s.count - 1));
    s.std_error = s.stddev / std::sqrt(static_cast<double>(s.count));
  }
  return s;
}

SampleSummary summarize_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("summarize_difference: size mismatch");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return summarize(d);
}

}  // namespace dcsi
