#include "core/orchsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

#include "core/errors.hpp"

namespace spikebench::orchsim {

Policy policy_from_string(const std::string& name) {
  if (name == "round_robin" || name == "rr") return Policy::round_robin;
  if (name == "least_connections" || name == "lc") return Policy::least_connections;
  if (name == "random" || name == "random_pick") return Policy::random_pick;
  throw InvalidArgumentError("unknown routing policy: " + name);
}

const char* policy_name(Policy p) {
  switch (p) {
    case Policy::round_robin: return "round_robin";
    case Policy::least_connections: return "least_connections";
    case Policy::random_pick: return "random";
  }
  return "unknown";
}

double ServiceTimeDist::sample(Rng& rng) const {
  switch (kind) {
    case Kind::deterministic:
      return median_ms;
    case Kind::lognormal:
      return median_ms * std::exp(sigma_log * normal01(rng));
    case Kind::empirical: {
      const auto i = static_cast<std::size_t>(uniform01(rng) *
                                              static_cast<double>(empirical_ms.size()));
      return empirical_ms[std::min(i, empirical_ms.size() - 1)];
    }
  }
  return median_ms;
}

double ServiceTimeDist::mean_ms() const {
  switch (kind) {
    case Kind::deterministic:
      return median_ms;
    case Kind::lognormal:
      return median_ms * std::exp(0.5 * sigma_log * sigma_log);
    case Kind::empirical: {
      double sum = 0.0;
      for (double x : empirical_ms) sum += x;
      return sum / static_cast<double>(empirical_ms.size());
    }
  }
  return median_ms;
}

ServiceTimeDist ServiceTimeDist::parse(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.empty()) throw InvalidArgumentError("empty service time spec");

  ServiceTimeDist d;
  try {
    if (parts[0] == "deterministic" && parts.size() == 2) {
      d.kind = Kind::deterministic;
      d.median_ms = std::stod(parts[1]);
    } else if (parts[0] == "lognormal" && parts.size() == 3) {
      d.kind = Kind::lognormal;
      d.median_ms = std::stod(parts[1]);
      d.sigma_log = std::stod(parts[2]);
    } else if (parts[0] == "empirical" && parts.size() == 2) {
      d.kind = Kind::empirical;
      std::ifstream in(parts[1]);
      if (!in) throw IoError("cannot open empirical latency file " + parts[1]);
      double x = 0.0;
      while (in >> x) d.empirical_ms.push_back(x);
      if (d.empirical_ms.empty())
        throw DataError("empirical latency file " + parts[1] + " holds no values");
    } else {
      throw InvalidArgumentError(
          "service time spec must be deterministic:V, lognormal:MEDIAN:SIGMA or "
          "empirical:FILE, got " +
          spec);
    }
  } catch (const std::invalid_argument&) {
    throw InvalidArgumentError("unparseable number in service time spec " + spec);
  } catch (const std::out_of_range&) {
    throw InvalidArgumentError("out-of-range number in service time spec " + spec);
  }
  if (!(d.median_ms > 0.0) && d.kind != Kind::empirical)
    throw InvalidArgumentError("service time must be > 0");
  if (d.kind == Kind::lognormal && !(d.sigma_log >= 0.0))
    throw InvalidArgumentError("lognormal sigma must be >= 0");
  return d;
}

std::string ServiceTimeDist::to_string() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::deterministic:
      out << "deterministic:" << median_ms;
      break;
    case Kind::lognormal:
      out << "lognormal:" << median_ms << ":" << sigma_log;
      break;
    case Kind::empirical:
      out << "empirical:<" << empirical_ms.size() << " samples>";
      break;
  }
  return out.str();
}

ServiceTimeDist lognormal_from_quantiles(double median_ms, double p99_ms) {
  if (!(median_ms > 0.0) || !(p99_ms >= median_ms))
    throw InvalidArgumentError("lognormal fit needs 0 < median <= p99");
  constexpr double z99 = 2.3263478740408408;  // standard normal 99th percentile
  ServiceTimeDist d;
  d.kind = ServiceTimeDist::Kind::lognormal;
  d.median_ms = median_ms;
  d.sigma_log = std::log(p99_ms / median_ms) / z99;
  return d;
}

double scaling_efficiency(double observed_rps, std::uint32_t replicas,
                          double per_replica_rps) {
  if (replicas == 0) throw InvalidArgumentError("scaling_efficiency: replicas must be > 0");
  if (!(per_replica_rps > 0.0))
    throw InvalidArgumentError("scaling_efficiency: per-replica rate must be > 0");
  if (!(observed_rps >= 0.0))
    throw InvalidArgumentError("scaling_efficiency: observed rate must be >= 0");
  return observed_rps / (static_cast<double>(replicas) * per_replica_rps);
}

void SimScenario::validate() const {
  if (replicas == 0) throw InvalidArgumentError("scenario: replicas must be > 0");
  if (clients == 0) throw InvalidArgumentError("scenario: clients must be > 0");
  if (requests_per_client == 0)
    throw InvalidArgumentError("scenario: requests_per_client must be > 0");
  if (!(network_delay_ms >= 0.0))
    throw InvalidArgumentError("scenario: network delay must be >= 0");
  if (!(start_jitter_ms >= 0.0))
    throw InvalidArgumentError("scenario: start jitter must be >= 0");
  if (service.kind == ServiceTimeDist::Kind::empirical && service.empirical_ms.empty())
    throw InvalidArgumentError("scenario: empirical service distribution has no samples");
}

SimScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file " + path);

  SimScenario sc;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      // Blank or comment-only lines are fine; anything else is a typo worth
      // failing loudly on.
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw FormatError(path + ":" + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "replicas") sc.replicas = static_cast<std::uint32_t>(std::stoul(value));
      else if (key == "clients") sc.clients = static_cast<std::uint32_t>(std::stoul(value));
      else if (key == "requests_per_client")
        sc.requests_per_client = static_cast<std::uint32_t>(std::stoul(value));
      else if (key == "policy") sc.policy = policy_from_string(value);
      else if (key == "service") sc.service = ServiceTimeDist::parse(value);
      else if (key == "network_delay_ms") sc.network_delay_ms = std::stod(value);
      else if (key == "start_jitter_ms") sc.start_jitter_ms = std::stod(value);
      else if (key == "seed") sc.seed = std::stoull(value);
      else
        throw FormatError(path + ":" + std::to_string(lineno) + ": unknown key " + key);
    } catch (const std::invalid_argument&) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": bad value for " + key);
    } catch (const std::out_of_range&) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": value out of range for " + key);
    }
  }
  sc.validate();
  return sc;
}

namespace {

// Priority encodes the fixed tie-break: finish work, deliver responses,
// accept handoffs, then take new arrivals.
enum EventKind : int { kServiceEnd = 0, kResponse = 1, kEnqueue = 2, kArrival = 3 };

struct Event {
  double time_ms;
  int kind;
  std::uint64_t request;

  bool operator>(const Event& o) const {
    if (time_ms != o.time_ms) return time_ms > o.time_ms;
    if (kind != o.kind) return kind > o.kind;
    return request > o.request;
  }
};

struct Replica {
  bool busy = false;
  std::queue<std::uint64_t> fifo;
  double busy_ms = 0.0;
  std::uint64_t served = 0;
};

}  // namespace

SimResult simulate(const SimScenario& scenario) {
  scenario.validate();
  Rng rng(mix_seed(scenario.seed, 0x53494d, 0));  // "SIM"

  const std::uint32_t R = scenario.replicas;
  const std::uint64_t total =
      static_cast<std::uint64_t>(scenario.clients) * scenario.requests_per_client;

  SimResult result;
  result.traces.reserve(total);

  std::vector<Replica> replicas(R);
  std::vector<std::uint32_t> inflight(R, 0);  // gateway view, arrival..response
  std::vector<std::uint32_t> sent_per_client(scenario.clients, 0);
  std::uint32_t rr_next = 0;
  std::uint32_t max_spread = 0;

  auto note_spread = [&] {
    const auto [lo, hi] = std::minmax_element(inflight.begin(), inflight.end());
    max_spread = std::max(max_spread, *hi - *lo);
  };

  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events;

  auto create_request = [&](std::uint32_t client, double now) {
    RequestTrace tr;
    tr.id = result.traces.size();
    tr.client = client;
    tr.arrival_ms = now;
    tr.service_ms = scenario.service.sample(rng);

    std::uint32_t target = 0;
    switch (scenario.policy) {
      case Policy::round_robin:
        target = rr_next;
        rr_next = (rr_next + 1) % R;
        break;
      case Policy::least_connections: {
        // Lowest in-flight count, ties to the lowest index.
        target = 0;
        for (std::uint32_t r = 1; r < R; ++r)
          if (inflight[r] < inflight[target]) target = r;
        break;
      }
      case Policy::random_pick:
        target = std::min(static_cast<std::uint32_t>(uniform01(rng) * R), R - 1);
        break;
    }
    tr.replica = target;
    inflight[target] += 1;
    note_spread();
    result.traces.push_back(tr);
    sent_per_client[client] += 1;
    events.push({now + scenario.network_delay_ms, kEnqueue, tr.id});
  };

  // Clients wake up at a jittered offset, then run closed-loop.
  for (std::uint32_t c = 0; c < scenario.clients; ++c) {
    const double start =
        scenario.start_jitter_ms > 0.0 ? uniform_range(rng, 0.0, scenario.start_jitter_ms) : 0.0;
    events.push({start, kArrival, c});  // request field doubles as client id here
  }

  double first_arrival = -1.0, last_response = 0.0;

  while (!events.empty()) {
    const Event ev = events.top();
    events.pop();

    switch (ev.kind) {
      case kArrival: {
        const auto client = static_cast<std::uint32_t>(ev.request);
        if (first_arrival < 0.0 || ev.time_ms < first_arrival) first_arrival = ev.time_ms;
        create_request(client, ev.time_ms);
        break;
      }
      case kEnqueue: {
        RequestTrace& tr = result.traces[ev.request];
        tr.enqueue_ms = ev.time_ms;
        Replica& rep = replicas[tr.replica];
        if (!rep.busy) {
          rep.busy = true;
          tr.service_start_ms = ev.time_ms;
          events.push({ev.time_ms + tr.service_ms, kServiceEnd, tr.id});
        } else {
          rep.fifo.push(tr.id);
        }
        break;
      }
      case kServiceEnd: {
        RequestTrace& tr = result.traces[ev.request];
        tr.service_end_ms = ev.time_ms;
        Replica& rep = replicas[tr.replica];
        rep.busy_ms += tr.service_ms;
        rep.served += 1;
        if (!rep.fifo.empty()) {
          const auto next_id = rep.fifo.front();
          rep.fifo.pop();
          RequestTrace& nx = result.traces[next_id];
          nx.service_start_ms = ev.time_ms;
          events.push({ev.time_ms + nx.service_ms, kServiceEnd, next_id});
        } else {
          rep.busy = false;
        }
        events.push({ev.time_ms + scenario.network_delay_ms, kResponse, tr.id});
        break;
      }
      case kResponse: {
        RequestTrace& tr = result.traces[ev.request];
        tr.response_ms = ev.time_ms;
        last_response = std::max(last_response, ev.time_ms);
        inflight[tr.replica] -= 1;
        note_spread();
        if (sent_per_client[tr.client] < scenario.requests_per_client)
          create_request(tr.client, ev.time_ms);
        break;
      }
    }
  }

  const double duration_ms = last_response - first_arrival;
  result.duration_s = duration_ms / 1000.0;

  std::vector<double> latencies;
  latencies.reserve(result.traces.size());
  double service_sum = 0.0;
  for (const auto& tr : result.traces) {
    latencies.push_back(tr.latency_ms());
    service_sum += tr.service_ms;
  }
  result.mean_service_ms = service_sum / static_cast<double>(result.traces.size());
  result.throughput_rps = static_cast<double>(result.traces.size()) / result.duration_s;
  result.latency = stats::summarize_latencies(latencies);
  result.tail_ratio = result.latency.p99 / result.latency.p50;
  result.efficiency =
      scaling_efficiency(result.throughput_rps, R, 1000.0 / result.mean_service_ms);
  result.max_inflight_spread = max_spread;

  result.per_replica.resize(R);
  for (std::uint32_t r = 0; r < R; ++r) {
    result.per_replica[r].replica = r;
    result.per_replica[r].requests = replicas[r].served;
    result.per_replica[r].busy_ms = replicas[r].busy_ms;
    result.per_replica[r].utilization = duration_ms > 0.0 ? replicas[r].busy_ms / duration_ms : 0.0;
  }
  return result;
}

bench::BenchReport SimResult::to_report(const SimScenario& scenario) const {
  std::vector<bench::Sample> samples;
  samples.reserve(traces.size());
  const double t0 = traces.empty() ? 0.0 : traces.front().arrival_ms;
  for (const auto& tr : traces) {
    bench::Sample s;
    s.client = tr.client;
    s.request_index = static_cast<std::uint32_t>(tr.id);
    s.send_ms = tr.arrival_ms - t0;
    s.latency_ms = tr.latency_ms();
    s.outcome = bench::Outcome::ok;
    samples.push_back(s);
  }

  auto report = bench::compute_report(samples, duration_s);
  report.scaling_efficiency = efficiency;
  report.per_replica = per_replica;
  report.config_echo = {
      {"replicas", scenario.replicas},
      {"clients", scenario.clients},
      {"requests_per_client", scenario.requests_per_client},
      {"policy", policy_name(scenario.policy)},
      {"service", scenario.service.to_string()},
      {"network_delay_ms", scenario.network_delay_ms},
      {"start_jitter_ms", scenario.start_jitter_ms},
      {"seed", scenario.seed},
      {"mean_service_ms", mean_service_ms},
      {"max_inflight_spread", max_inflight_spread},
  };
  return report;
}

}  // namespace spikebench::orchsim
