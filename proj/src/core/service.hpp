#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "core/model_io.hpp"

namespace spikebench::serving {

struct ServiceConfig {
  std::string host = "0.0.0.0";
  int port = 8080;  // 0 = pick a free port (useful in tests)
  std::string model_path;
  std::uint32_t queue_depth = 64;  // waiting requests, excluding the running one
  double request_timeout_ms = 120000.0;

  void validate() const;
};

struct PredictResult {
  bool ok = false;
  std::string error;  // set when !ok
  int prediction_all_activity = 0;
  int prediction_proportion = 0;
  std::int64_t total_output_spikes = 0;
  bool no_activity = false;
  double inference_ms = 0.0;
};

// Single-threaded inference executor with a bounded FIFO queue. Exactly one
// job computes at a time; everything else waits in arrival order. Callers
// that stop waiting mark their job abandoned and the worker discards it
// unstarted.
class InferenceWorker {
 public:
  struct Job {
    std::vector<double> pixels;
    std::uint64_t seed = 0;
    double intensity_hz = 0.0;
    std::promise<PredictResult> done;
    std::shared_ptr<std::atomic<bool>> abandoned = std::make_shared<std::atomic<bool>>(false);
    std::uint64_t sequence = 0;
  };

  InferenceWorker() = default;
  ~InferenceWorker();

  void start(modelio::ModelArtifact artifact, std::uint32_t queue_depth);
  // Finishes the in-flight job, fails everything still queued, joins.
  void shutdown();

  // Returns a future plus the abandoned flag, or nullopt when the queue is
  // full (the caller should answer 503 overloaded).
  struct Ticket {
    std::future<PredictResult> result;
    std::shared_ptr<std::atomic<bool>> abandoned;
  };
  std::optional<Ticket> submit(std::vector<double> pixels, std::uint64_t seed,
                               double intensity_hz);

  std::size_t queued() const;
  std::uint64_t completed() const { return completed_.load(); }
  // Highest number of jobs ever observed computing at once; stays at 1 as
  // long as the single-worker contract holds.
  std::uint32_t max_concurrency() const { return max_concurrency_.load(); }
  // Sequence numbers in completion order, for FIFO verification in tests.
  std::vector<std::uint64_t> completion_log() const;

  const modelio::ModelArtifact& artifact() const { return *artifact_; }

 private:
  void run();

  std::unique_ptr<modelio::ModelArtifact> artifact_;
  std::uint32_t queue_depth_ = 0;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Job> queue_;
  bool stopping_ = false;
  std::thread worker_;
  std::uint64_t next_sequence_ = 0;

  std::atomic<std::uint64_t> completed_{0};
  std::atomic<std::uint32_t> computing_{0};
  std::atomic<std::uint32_t> max_concurrency_{0};
  std::vector<std::uint64_t> completion_log_;
  mutable std::mutex log_mu_;
};

// HTTP front end: POST /predict feeds the worker, GET /healthz and
// GET /version answer from memory without touching the inference path.
class Service {
 public:
  explicit Service(ServiceConfig cfg);
  ~Service();

  // Binds and starts serving on a background thread. Throws SetupError when
  // the port cannot be bound, IoError/CorruptError/... when the model file
  // is present but unloadable.
  void start();
  // Graceful: finish the running inference, fail queued jobs, stop listening.
  void stop();
  void wait();  // blocks until stop() is called from elsewhere

  int port() const { return bound_port_; }
  bool ready() const { return ready_; }
  const InferenceWorker& worker() const { return worker_; }

 private:
  struct Impl;  // hides httplib from this header
  ServiceConfig cfg_;
  std::unique_ptr<Impl> impl_;
  InferenceWorker worker_;
  std::thread listener_;
  int bound_port_ = 0;
  bool ready_ = false;
  std::atomic<bool> stopped_{false};
  double model_load_ms_ = 0.0;
};

// Runs a service until sb_serve_stop() (or a signal handler) asks it to
// stop. Blocking; used by the C API.
void serve_blocking(const ServiceConfig& cfg);
void request_serve_stop();

}  // namespace spikebench::serving
