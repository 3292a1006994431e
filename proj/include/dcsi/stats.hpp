#ifndef DCSI_STATS_HPP
#define DCSI_STATS_HPP

#include <cstddef>
#include <span>

namespace dcsi {

/// Recursive pairwise summation; result depends only on the order of `values`.
double pairwise_sum(std::span<const double> values);

struct SampleSummary {
  std::size_t count = 0;
  double mean = 0;
  double stddev = 0;     // sample standard deviation (n - 1)
  double std_error = 0;  // stddev / sqrt(n)
};

SampleSummary summarize(std::span<const double> values);
/// Summary of a[i] - b[i] (paired samples).
SampleSummary summarize_difference(std::span<const double> a, std::span<const double> b);

}  // namespace dcsi

#endif  // DCSI_STATS_HPP
