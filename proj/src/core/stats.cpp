#include "core/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace spikebench::stats {

double percentile_nearest_rank(std::span<const double> sorted_ascending, double p) {
  if (sorted_ascending.empty())
    throw StatError("percentile: undefined for an empty sample list");
  if (!(p > 0.0) || p > 100.0)
    throw StatError("percentile: p must be in (0, 100], got " + std::to_string(p));
  const auto n = sorted_ascending.size();
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
  if (rank == 0) rank = 1;  // p so small that ceil underflows to 0
  if (rank > n) rank = n;
  return sorted_ascending[rank - 1];
}

LatencySummary summarize_latencies(std::vector<double> latencies_ms) {
  if (latencies_ms.empty())
    throw StatError("summarize_latencies: undefined for an empty sample list");
  std::sort(latencies_ms.begin(), latencies_ms.end());
  LatencySummary s;
  s.min = latencies_ms.front();
  s.p50 = percentile_nearest_rank(latencies_ms, 50.0);
  s.p75 = percentile_nearest_rank(latencies_ms, 75.0);
  s.p95 = percentile_nearest_rank(latencies_ms, 95.0);
  s.p99 = percentile_nearest_rank(latencies_ms, 99.0);
  s.max = latencies_ms.back();
  return s;
}

double infrastructure_overhead_ms(std::span<const double> sorted_ascending) {
  if (sorted_ascending.empty())
    throw StatError("infrastructure_overhead: undefined for an empty sample list");
  return percentile_nearest_rank(sorted_ascending, 50.0) - sorted_ascending.front();
}

}  // namespace spikebench::stats
