#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/bench.hpp"
#include "core/rng.hpp"
#include "core/stats.hpp"

namespace spikebench::orchsim {

enum class Policy { round_robin, least_connections, random_pick };
Policy policy_from_string(const std::string& name);
const char* policy_name(Policy p);

// Service time model for a simulated replica.
struct ServiceTimeDist {
  enum class Kind { deterministic, lognormal, empirical };
  Kind kind = Kind::deterministic;
  double median_ms = 749.0;  // fixed value, or the lognormal median
  double sigma_log = 0.0;    // lognormal shape
  std::vector<double> empirical_ms;

  double sample(Rng& rng) const;
  // Analytic mean (empirical: sample average). For reference and tests; the
  // simulator itself uses the realized mean of the draws it consumed.
  double mean_ms() const;

  // Accepts "deterministic:749", "lognormal:749:0.04" (median:sigma) or
  // "empirical:path.csv" (one latency per line).
  static ServiceTimeDist parse(const std::string& spec);
  std::string to_string() const;
};

// Lognormal with the given median whose 99th percentile matches p99_ms:
// sigma = ln(p99 / median) / z_99.
ServiceTimeDist lognormal_from_quantiles(double median_ms, double p99_ms);

// observed / (replicas * per_replica_rps): fraction of the linear-scaling
// ceiling actually delivered.
double scaling_efficiency(double observed_rps, std::uint32_t replicas,
                          double per_replica_rps);

struct SimScenario {
  std::uint32_t replicas = 1;
  std::uint32_t clients = 1;
  std::uint32_t requests_per_client = 50;
  Policy policy = Policy::round_robin;
  ServiceTimeDist service;
  double network_delay_ms = 0.0;
  double start_jitter_ms = 50.0;  // each client starts at U(0, jitter)
  std::uint64_t seed = 0;

  void validate() const;
};

// Flat key = value file ("replicas = 3", "service = lognormal:749:0.055").
SimScenario load_scenario(const std::string& path);

struct RequestTrace {
  std::uint64_t id = 0;
  std::uint32_t client = 0;
  std::uint32_t replica = 0;
  double arrival_ms = 0.0;        // client sent the request
  double enqueue_ms = 0.0;        // reached the replica
  double service_start_ms = 0.0;
  double service_end_ms = 0.0;
  double response_ms = 0.0;       // back at the client
  double service_ms = 0.0;

  double latency_ms() const { return response_ms - arrival_ms; }
};

struct SimResult {
  std::vector<RequestTrace> traces;  // indexed by request id
  double duration_s = 0.0;
  double mean_service_ms = 0.0;  // realized over all draws
  double throughput_rps = 0.0;
  stats::LatencySummary latency;
  double tail_ratio = 0.0;
  double efficiency = 0.0;
  std::vector<bench::ReplicaStats> per_replica;
  // Largest instantaneous gap between the busiest and idlest replica, by the
  // gateway's in-flight view. Least-connections keeps this at <= 1 whenever
  // clients <= replicas.
  std::uint32_t max_inflight_spread = 0;

  // Same schema as a live benchmark report, plus the replica section.
  bench::BenchReport to_report(const SimScenario& scenario) const;
};

// Closed-loop discrete-event simulation: every client has exactly one
// request outstanding, zero think time; the gateway routes at arrival time;
// each replica serves its own FIFO queue one request at a time. Ties in
// event time resolve by kind (service-end, response, enqueue, arrival) and
// then request id, so results are exactly reproducible.
SimResult simulate(const SimScenario& scenario);

}  // namespace spikebench::orchsim
