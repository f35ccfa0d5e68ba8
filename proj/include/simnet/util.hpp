#pragma once

#include <functional>
#include <span>

namespace simnet {

// Order-fixed cascade summation. Used for every Monte Carlo aggregate so
// that results do not depend on how replicas were scheduled across workers.
double pairwise_sum(std::span<const double> xs);

double mean_of(std::span<const double> xs);

// Sample standard deviation (n-1 denominator); 0 for fewer than two values.
double sample_std(std::span<const double> xs);

// sample_std / sqrt(n); 0 for fewer than two values.
double standard_error(std::span<const double> xs);

// Runs fn(i) for every i in [0, count) split across `workers` threads.
// The split is a fixed function of (count, workers); callers write results
// into per-index slots, so output is identical for any worker count.
void parallel_for_index(int count, int workers, const std::function<void(int)>& fn);

}  // namespace simnet
