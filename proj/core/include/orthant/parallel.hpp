#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace orthant {

/// ORTHANT_THREADS if set and positive, otherwise hardware concurrency.
int default_thread_count();

/// Split [0, n) into contiguous chunks, one per worker. `body(begin, end,
/// worker)` runs on its own thread; the first exception is rethrown.
/// threads <= 0 means default_thread_count().
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t, int)>& body);

/// Pairwise (cascade) summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

struct SampleMoments {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Mean and standard error of the mean, both via pairwise sums.
SampleMoments sample_moments(std::span<const double> values);

}  // namespace orthant
