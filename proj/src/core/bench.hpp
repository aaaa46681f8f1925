#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "core/mnist.hpp"
#include "core/stats.hpp"

namespace spikebench::bench {

enum class Outcome : int {
  ok = 0,
  timeout = 1,
  connection_error = 2,
  http_error = 3,
  overload = 4,
};
inline constexpr int kOutcomeCount = 5;
const char* outcome_name(Outcome o);

// One request as seen by the load generator.
struct Sample {
  std::uint32_t client = 0;
  std::uint32_t request_index = 0;
  double send_ms = 0.0;     // relative to first send
  double latency_ms = 0.0;  // send to completion, whatever the outcome
  Outcome outcome = Outcome::ok;
  int http_status = 0;
  int true_digit = -1;
  int pred_all_activity = -1;
  int pred_proportion = -1;
  std::int64_t total_spikes = 0;
  double server_inference_ms = -1.0;
};

struct BenchConfig {
  std::string url;  // e.g. http://127.0.0.1:8080
  std::uint32_t clients = 1;
  std::uint32_t requests_per_client = 50;
  std::string data_dir;  // directory holding the test split for payloads
  double timeout_ms = 120000.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct BenchRun {
  std::vector<Sample> samples;
  double duration_s = 0.0;  // first send to last completion
};

// Closed-loop load generation: each client thread sends its next request the
// moment the previous response lands, with zero think time. Payloads are
// test-set images chosen stratified across digits and shuffled by the seed.
// The target's health endpoint is probed first; SetupError if unreachable.
BenchRun run_benchmark(const BenchConfig& cfg, const data::Dataset& test_set);

struct DigitGroup {
  std::uint32_t count = 0;
  double mean_latency_ms = 0.0;
  double accuracy_all_activity = 0.0;
  double accuracy_proportion = 0.0;
};

struct ReplicaStats {
  std::uint32_t replica = 0;
  std::uint64_t requests = 0;
  double busy_ms = 0.0;
  double utilization = 0.0;
};

// Metric bundle shared by the live benchmark and the orchestration
// simulator (which fills the replica fields).
struct BenchReport {
  nlohmann::json config_echo;
  double duration_s = 0.0;
  std::uint64_t total = 0;
  std::array<std::uint64_t, kOutcomeCount> by_outcome{};
  double throughput_rps = 0.0;  // ok completions per second of wall time

  std::optional<stats::LatencySummary> latency;  // ok samples only
  double tail_ratio = 0.0;                       // p99 / p50 when latency present
  double infrastructure_overhead_ms = 0.0;       // p50 - min when latency present

  std::optional<double> accuracy_all_activity;  // ok samples with known truth
  std::optional<double> accuracy_proportion;
  std::array<std::optional<DigitGroup>, 10> per_digit;

  std::optional<double> scaling_efficiency;
  std::vector<ReplicaStats> per_replica;

  std::uint64_t ok() const { return by_outcome[0]; }
};

// Aggregates samples into the full metric suite. Failed requests count in
// the outcome tallies and nothing else; digits never seen among the ok
// samples stay absent from per_digit.
BenchReport compute_report(std::span<const Sample> samples, double duration_s);

// p50 - min over the ok samples. StatError when there are none.
double compute_overhead_ms(std::span<const Sample> samples);

enum class ReportFormat { json, csv };
std::string report_to_string(const BenchReport& report, ReportFormat format);
void export_report(const BenchReport& report, const std::string& path, ReportFormat format);

// Raw per-request dump, one CSV row per sample.
std::string samples_to_csv(std::span<const Sample> samples);

}  // namespace spikebench::bench
