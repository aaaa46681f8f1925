#include "core/bench.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace spikebench::bench {

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::ok: return "ok";
    case Outcome::timeout: return "timeout";
    case Outcome::connection_error: return "connection_error";
    case Outcome::http_error: return "http_error";
    case Outcome::overload: return "overload";
  }
  return "unknown";
}

void BenchConfig::validate() const {
  if (url.empty()) throw InvalidArgumentError("bench: url must not be empty");
  if (clients == 0) throw InvalidArgumentError("bench: clients must be > 0");
  if (requests_per_client == 0) throw InvalidArgumentError("bench: requests must be > 0");
  if (!(timeout_ms > 0.0)) throw InvalidArgumentError("bench: timeout must be > 0");
}

namespace {

constexpr std::uint64_t kPayloadStream = 0x504159;  // "PAY"
constexpr std::uint64_t kRequestStream = 0x524551;  // "REQ"

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

// Stratified pool of payload indices, shuffled deterministically. Requests
// beyond the pool size wrap around.
std::vector<std::size_t> build_payload_pool(const data::Dataset& test_set, std::uint64_t total,
                                            std::uint64_t seed) {
  const std::size_t pool_size = std::min<std::uint64_t>(total, test_set.size());
  auto pool = data::stratified_indices(test_set, pool_size);
  Rng rng(mix_seed(seed, kPayloadStream, 0));
  for (std::size_t i = pool.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(pool[i - 1], pool[std::min(j, i - 1)]);
  }
  return pool;
}

}  // namespace

BenchRun run_benchmark(const BenchConfig& cfg, const data::Dataset& test_set) {
  cfg.validate();
  if (test_set.size() == 0) throw InvalidArgumentError("bench: test set is empty");

  {
    httplib::Client probe(cfg.url);
    probe.set_connection_timeout(5, 0);
    probe.set_read_timeout(5, 0);
    auto res = probe.Get("/healthz");
    if (!res)
      throw SetupError("bench: target " + cfg.url + " is unreachable (health probe failed)");
    if (res->status != 200)
      throw SetupError("bench: health probe returned HTTP " + std::to_string(res->status));
  }

  const std::uint64_t total =
      static_cast<std::uint64_t>(cfg.clients) * cfg.requests_per_client;
  const auto pool = build_payload_pool(test_set, total, cfg.seed);

  // Pre-serialize every request body so the hot loop measures the service,
  // not our own JSON encoder.
  std::vector<std::string> bodies(total);
  std::vector<int> truths(total);
  for (std::uint64_t k = 0; k < total; ++k) {
    const std::size_t idx = pool[k % pool.size()];
    const auto image = test_set.image(idx);
    nlohmann::json body;
    body["pixels"] = std::vector<int>(image.begin(), image.end());
    // Keep seeds under 2^53 so they survive JSON number round-trips.
    body["seed"] = mix_seed(cfg.seed, kRequestStream, k) & ((std::uint64_t(1) << 53) - 1);
    bodies[k] = body.dump();
    truths[k] = test_set.labels[idx];
  }

  std::vector<Sample> samples(total);
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<std::thread> pool_threads;
  pool_threads.reserve(cfg.clients);
  for (std::uint32_t c = 0; c < cfg.clients; ++c) {
    pool_threads.emplace_back([&, c]() {
      httplib::Client http(cfg.url);
      const auto timeout_us =
          std::chrono::microseconds(static_cast<std::int64_t>(cfg.timeout_ms * 1000.0));
      http.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::milliseconds(5000)));
      http.set_read_timeout(timeout_us);
      http.set_write_timeout(timeout_us);
      http.set_keep_alive(true);

      for (std::uint32_t i = 0; i < cfg.requests_per_client; ++i) {
        const std::uint64_t k = std::uint64_t(c) * cfg.requests_per_client + i;
        Sample& s = samples[k];
        s.client = c;
        s.request_index = i;
        s.true_digit = truths[k];
        s.send_ms = ms_since(t0);

        const auto sent = std::chrono::steady_clock::now();
        auto res = http.Post("/predict", bodies[k], "application/json");
        s.latency_ms = ms_since(t0) - s.send_ms;
        (void)sent;

        if (!res) {
          // httplib does not distinguish read timeouts from dropped
          // connections reliably, so classify by elapsed time.
          s.outcome = s.latency_ms >= cfg.timeout_ms * 0.9 ? Outcome::timeout
                                                           : Outcome::connection_error;
          continue;
        }
        s.http_status = res->status;
        if (res->status == 200) {
          s.outcome = Outcome::ok;
          try {
            const auto j = nlohmann::json::parse(res->body);
            s.pred_all_activity = j.value("prediction_all_activity", -1);
            s.pred_proportion = j.value("prediction_proportion", -1);
            s.total_spikes = j.value("total_output_spikes", std::int64_t{0});
            s.server_inference_ms = j.value("inference_ms", -1.0);
          } catch (const nlohmann::json::exception&) {
            s.outcome = Outcome::http_error;  // 200 with an unparseable body
          }
        } else if (res->status == 503) {
          std::string code;
          try {
            code = nlohmann::json::parse(res->body)
                       .value("error", nlohmann::json::object())
                       .value("code", "");
          } catch (const nlohmann::json::exception&) {
          }
          s.outcome = code == "overloaded" ? Outcome::overload : Outcome::http_error;
        } else if (res->status == 504) {
          s.outcome = Outcome::timeout;
        } else {
          s.outcome = Outcome::http_error;
        }
      }
    });
  }
  for (auto& th : pool_threads) th.join();

  BenchRun run;
  run.samples = std::move(samples);
  double first_send = 0.0, last_done = 0.0;
  for (std::size_t k = 0; k < run.samples.size(); ++k) {
    const auto& s = run.samples[k];
    if (k == 0 || s.send_ms < first_send) first_send = s.send_ms;
    last_done = std::max(last_done, s.send_ms + s.latency_ms);
  }
  run.duration_s = (last_done - first_send) / 1000.0;
  return run;
}

BenchReport compute_report(std::span<const Sample> samples, double duration_s) {
  BenchReport rep;
  rep.duration_s = duration_s;
  rep.total = samples.size();

  std::vector<double> ok_latencies;
  ok_latencies.reserve(samples.size());
  std::uint64_t acc_all = 0, acc_prop = 0, with_truth = 0;
  std::array<double, 10> digit_latency_sum{};
  std::array<std::uint32_t, 10> digit_count{}, digit_ok_all{}, digit_ok_prop{};

  for (const auto& s : samples) {
    rep.by_outcome[static_cast<int>(s.outcome)] += 1;
    if (s.outcome != Outcome::ok) continue;
    ok_latencies.push_back(s.latency_ms);
    if (s.true_digit >= 0 && s.true_digit <= 9) {
      with_truth += 1;
      digit_count[s.true_digit] += 1;
      digit_latency_sum[s.true_digit] += s.latency_ms;
      if (s.pred_all_activity == s.true_digit) {
        acc_all += 1;
        digit_ok_all[s.true_digit] += 1;
      }
      if (s.pred_proportion == s.true_digit) {
        acc_prop += 1;
        digit_ok_prop[s.true_digit] += 1;
      }
    }
  }

  if (duration_s > 0.0)
    rep.throughput_rps = static_cast<double>(rep.ok()) / duration_s;

  if (!ok_latencies.empty()) {
    rep.latency = stats::summarize_latencies(ok_latencies);
    rep.tail_ratio = rep.latency->p99 / rep.latency->p50;
    rep.infrastructure_overhead_ms = rep.latency->p50 - rep.latency->min;
  }

  if (with_truth > 0) {
    rep.accuracy_all_activity = static_cast<double>(acc_all) / with_truth;
    rep.accuracy_proportion = static_cast<double>(acc_prop) / with_truth;
  }
  for (int d = 0; d < 10; ++d) {
    if (digit_count[d] == 0) continue;
    DigitGroup g;
    g.count = digit_count[d];
    g.mean_latency_ms = digit_latency_sum[d] / digit_count[d];
    g.accuracy_all_activity = static_cast<double>(digit_ok_all[d]) / digit_count[d];
    g.accuracy_proportion = static_cast<double>(digit_ok_prop[d]) / digit_count[d];
    rep.per_digit[d] = g;
  }
  return rep;
}

double compute_overhead_ms(std::span<const Sample> samples) {
  std::vector<double> ok;
  for (const auto& s : samples)
    if (s.outcome == Outcome::ok) ok.push_back(s.latency_ms);
  if (ok.empty()) throw StatError("overhead: no successful samples");
  std::sort(ok.begin(), ok.end());
  return stats::infrastructure_overhead_ms(ok);
}

namespace {

nlohmann::ordered_json report_to_json(const BenchReport& r) {
  nlohmann::ordered_json j;
  if (!r.config_echo.is_null()) j["config"] = r.config_echo;
  j["duration_s"] = r.duration_s;
  nlohmann::ordered_json req;
  req["total"] = r.total;
  for (int k = 0; k < kOutcomeCount; ++k)
    req[outcome_name(static_cast<Outcome>(k))] = r.by_outcome[k];
  j["requests"] = req;
  j["throughput_rps"] = r.throughput_rps;
  if (r.latency) {
    j["latency_ms"] = {{"min", r.latency->min}, {"p50", r.latency->p50},
                       {"p75", r.latency->p75}, {"p95", r.latency->p95},
                       {"p99", r.latency->p99}, {"max", r.latency->max}};
    j["tail_ratio"] = r.tail_ratio;
    j["infrastructure_overhead_ms"] = r.infrastructure_overhead_ms;
  } else {
    j["latency_ms"] = nullptr;
    j["tail_ratio"] = nullptr;
    j["infrastructure_overhead_ms"] = nullptr;
  }
  if (r.accuracy_all_activity) {
    j["accuracy"] = {{"all_activity", *r.accuracy_all_activity},
                     {"proportion", *r.accuracy_proportion}};
  } else {
    j["accuracy"] = nullptr;
  }
  auto digits = nlohmann::ordered_json::array();
  for (int d = 0; d < 10; ++d) {
    if (!r.per_digit[d]) continue;
    const auto& g = *r.per_digit[d];
    digits.push_back({{"digit", d},
                      {"count", g.count},
                      {"mean_latency_ms", g.mean_latency_ms},
                      {"all_activity", g.accuracy_all_activity},
                      {"proportion", g.accuracy_proportion}});
  }
  j["per_digit"] = digits;
  if (r.scaling_efficiency) j["scaling_efficiency"] = *r.scaling_efficiency;
  if (!r.per_replica.empty()) {
    auto reps = nlohmann::ordered_json::array();
    for (const auto& rs : r.per_replica)
      reps.push_back({{"replica", rs.replica},
                      {"requests", rs.requests},
                      {"busy_ms", rs.busy_ms},
                      {"utilization", rs.utilization}});
    j["per_replica"] = reps;
  }
  return j;
}

std::string report_to_csv(const BenchReport& r) {
  std::ostringstream out;
  out << "key,value\n";
  auto row = [&](const std::string& k, double v) { out << k << ',' << v << '\n'; };
  out << "duration_s," << r.duration_s << '\n';
  out << "total," << r.total << '\n';
  for (int k = 0; k < kOutcomeCount; ++k)
    out << outcome_name(static_cast<Outcome>(k)) << ',' << r.by_outcome[k] << '\n';
  row("throughput_rps", r.throughput_rps);
  if (r.latency) {
    row("latency_min_ms", r.latency->min);
    row("latency_p50_ms", r.latency->p50);
    row("latency_p75_ms", r.latency->p75);
    row("latency_p95_ms", r.latency->p95);
    row("latency_p99_ms", r.latency->p99);
    row("latency_max_ms", r.latency->max);
    row("tail_ratio", r.tail_ratio);
    row("infrastructure_overhead_ms", r.infrastructure_overhead_ms);
  }
  if (r.accuracy_all_activity) {
    row("accuracy_all_activity", *r.accuracy_all_activity);
    row("accuracy_proportion", *r.accuracy_proportion);
  }
  if (r.scaling_efficiency) row("scaling_efficiency", *r.scaling_efficiency);
  return out.str();
}

}  // namespace

std::string report_to_string(const BenchReport& report, ReportFormat format) {
  if (format == ReportFormat::json) return report_to_json(report).dump(2) + "\n";
  return report_to_csv(report);
}

void export_report(const BenchReport& report, const std::string& path, ReportFormat format) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create " + path);
  out << report_to_string(report, format);
  if (!out) throw IoError("write failed on " + path);
}

std::string samples_to_csv(std::span<const Sample> samples) {
  std::ostringstream out;
  out << "client,request,send_ms,latency_ms,outcome,http_status,true_digit,"
         "pred_all_activity,pred_proportion,total_spikes,server_inference_ms\n";
  for (const auto& s : samples) {
    out << s.client << ',' << s.request_index << ',' << s.send_ms << ',' << s.latency_ms << ','
        << outcome_name(s.outcome) << ',' << s.http_status << ',' << s.true_digit << ','
        << s.pred_all_activity << ',' << s.pred_proportion << ',' << s.total_spikes << ','
        << s.server_inference_ms << '\n';
  }
  return out.str();
}

}  // namespace spikebench::bench
