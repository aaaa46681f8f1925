#pragma once

#include <span>
#include <vector>

namespace spikebench::stats {

// Nearest-rank percentile over an ascending-sorted list: the value at
// 1-based index ceil(p / 100 * N). p must be in (0, 100]; empty input is a
// StatError. No interpolation, so the result is always an observed value.
double percentile_nearest_rank(std::span<const double> sorted_ascending, double p);

struct LatencySummary {
  double min = 0.0;
  double p50 = 0.0;
  double p75 = 0.0;
  double p95 = 0.0;
  double p99 = 0.0;
  double max = 0.0;
};

// Sorts a copy and reads off the standard summary points.
LatencySummary summarize_latencies(std::vector<double> latencies_ms);

// Fixed-cost floor baked into every request: median minus the fastest
// observation. On an unloaded target the fastest sample is close to pure
// compute, so the difference is what the transport and scheduling layers add
// in the typical case.
double infrastructure_overhead_ms(std::span<const double> sorted_ascending);

}  // namespace spikebench::stats
