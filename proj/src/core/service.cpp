#include "core/service.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <random>

#include "httplib.h"
#include "json.hpp"

#include "core/encoding.hpp"
#include "core/errors.hpp"
#include "core/network.hpp"
#include "core/rng.hpp"

namespace spikebench::serving {

void ServiceConfig::validate() const {
  if (port < 0 || port > 65535) throw InvalidArgumentError("service: port out of range");
  if (!(request_timeout_ms > 0.0))
    throw InvalidArgumentError("service: request timeout must be > 0");
}

// ---------------------------------------------------------------------------
// InferenceWorker

InferenceWorker::~InferenceWorker() { shutdown(); }

void InferenceWorker::start(modelio::ModelArtifact artifact, std::uint32_t queue_depth) {
  if (worker_.joinable()) throw StateError("InferenceWorker: already started");
  artifact_ = std::make_unique<modelio::ModelArtifact>(std::move(artifact));
  queue_depth_ = queue_depth;
  stopping_ = false;
  worker_ = std::thread([this] { run(); });
}

void InferenceWorker::shutdown() {
  {
    std::lock_guard lock(mu_);
    if (stopping_ || !worker_.joinable()) {
      if (!worker_.joinable()) return;
    }
    stopping_ = true;
  }
  cv_.notify_all();
  if (worker_.joinable()) worker_.join();

  // Fail whatever is still queued so no handler waits forever.
  std::deque<Job> leftovers;
  {
    std::lock_guard lock(mu_);
    leftovers.swap(queue_);
  }
  for (auto& job : leftovers) {
    PredictResult r;
    r.ok = false;
    r.error = "shutting_down";
    job.done.set_value(std::move(r));
  }
}

std::optional<InferenceWorker::Ticket> InferenceWorker::submit(std::vector<double> pixels,
                                                               std::uint64_t seed,
                                                               double intensity_hz) {
  Job job;
  job.pixels = std::move(pixels);
  job.seed = seed;
  job.intensity_hz = intensity_hz;
  Ticket ticket{job.done.get_future(), job.abandoned};

  {
    std::lock_guard lock(mu_);
    if (stopping_ || !worker_.joinable())
      throw StateError("InferenceWorker: not accepting jobs");
    if (queue_.size() >= queue_depth_) return std::nullopt;
    job.sequence = next_sequence_++;
    queue_.push_back(std::move(job));
  }
  cv_.notify_one();
  return ticket;
}

std::size_t InferenceWorker::queued() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

std::vector<std::uint64_t> InferenceWorker::completion_log() const {
  std::lock_guard lock(log_mu_);
  return completion_log_;
}

void InferenceWorker::run() {
  for (;;) {
    Job job;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;  // stopping and drained
      job = std::move(queue_.front());
      queue_.pop_front();
    }

    if (job.abandoned->load()) {
      // The handler gave up (client timeout); skip the work entirely.
      PredictResult r;
      r.ok = false;
      r.error = "abandoned";
      job.done.set_value(std::move(r));
      continue;
    }

    const auto started = computing_.fetch_add(1) + 1;
    std::uint32_t seen = max_concurrency_.load();
    while (started > seen && !max_concurrency_.compare_exchange_weak(seen, started)) {
    }

    PredictResult result;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      auto& model = artifact_->model;
      const auto spikes = snn::poisson_encode(job.pixels, job.intensity_hz,
                                              artifact_->window_ms, model.exc_params.dt_ms,
                                              job.seed);
      const auto rec = snn::run_network(model, spikes, /*learning=*/false);
      result.ok = true;
      result.prediction_all_activity = rec.pred_all_activity;
      result.prediction_proportion = rec.pred_proportion;
      result.total_output_spikes = rec.total_output_spikes;
      result.no_activity = rec.no_activity();
    } catch (const std::exception& e) {
      result.ok = false;
      result.error = e.what();
    }
    result.inference_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();

    computing_.fetch_sub(1);
    completed_.fetch_add(1);
    {
      std::lock_guard lock(log_mu_);
      completion_log_.push_back(job.sequence);
    }
    job.done.set_value(std::move(result));
  }
}

// ---------------------------------------------------------------------------
// Service

struct Service::Impl {
  httplib::Server svr;
};

namespace {

std::string error_body(const std::string& code, const std::string& message) {
  nlohmann::json j = {{"error", {{"code", code}, {"message", message}}}};
  return j.dump();
}

}  // namespace

Service::Service(ServiceConfig cfg) : cfg_(std::move(cfg)), impl_(std::make_unique<Impl>()) {
  cfg_.validate();
}

Service::~Service() { stop(); }

void Service::start() {
  namespace fs = std::filesystem;

  const auto load_start = std::chrono::steady_clock::now();
  if (!cfg_.model_path.empty() && fs::exists(cfg_.model_path)) {
    auto artifact = modelio::load_model(cfg_.model_path);
    if (!artifact.model.labels_assigned())
      throw StateError("service: model has no neuron labels, cannot serve predictions");
    worker_.start(std::move(artifact), cfg_.queue_depth);
    ready_ = true;
  }
  model_load_ms_ =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - load_start)
          .count();

  auto& svr = impl_->svr;

  // Every queued request parks its handler thread on a future, so the pool
  // must be larger than the queue or health checks would starve behind them.
  const std::size_t pool_size = cfg_.queue_depth + 8;
  svr.new_task_queue = [pool_size] { return new httplib::ThreadPool(pool_size); };

  // Non-deterministic fallback seed stream for requests that omit "seed".
  const std::uint64_t boot_entropy =
      (std::uint64_t(std::random_device{}()) << 32) ^ std::random_device{}();
  auto fallback_counter = std::make_shared<std::atomic<std::uint64_t>>(0);

  svr.Post("/predict", [this, boot_entropy, fallback_counter](const httplib::Request& req,
                                                              httplib::Response& res) {
    res.set_header("Content-Type", "application/json");
    if (!ready_) {
      res.status = 503;
      res.body = error_body("unready", "no model loaded");
      return;
    }

    std::vector<double> pixels;
    std::uint64_t seed = 0;
    double intensity = worker_.artifact().intensity_hz;
    try {
      const auto j = nlohmann::json::parse(req.body);
      if (!j.contains("pixels") || !j["pixels"].is_array())
        throw InvalidArgumentError("body must contain a \"pixels\" array");
      pixels = j["pixels"].get<std::vector<double>>();
      const auto expected = worker_.artifact().model.input_size;
      if (pixels.size() != expected)
        throw InvalidArgumentError("expected " + std::to_string(expected) + " pixels, got " +
                                   std::to_string(pixels.size()));
      for (double px : pixels)
        if (!(px >= 0.0 && px <= 255.0))
          throw InvalidArgumentError("pixels must lie in [0, 255]");
      if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
          throw InvalidArgumentError("\"seed\" must be a non-negative integer");
        const auto s = j["seed"].get<std::int64_t>();
        if (s < 0) throw InvalidArgumentError("\"seed\" must be a non-negative integer");
        seed = static_cast<std::uint64_t>(s);
      } else {
        seed = mix_seed(boot_entropy, fallback_counter->fetch_add(1));
      }
      if (j.contains("intensity")) {
        intensity = j["intensity"].get<double>();
        if (!(intensity > 0.0)) throw InvalidArgumentError("\"intensity\" must be > 0");
      }
    } catch (const nlohmann::json::exception& e) {
      res.status = 400;
      res.body = error_body("bad_request", std::string("invalid JSON: ") + e.what());
      return;
    } catch (const InvalidArgumentError& e) {
      res.status = 400;
      res.body = error_body("bad_request", e.what());
      return;
    }

    std::optional<InferenceWorker::Ticket> ticket;
    try {
      ticket = worker_.submit(std::move(pixels), seed, intensity);
    } catch (const StateError&) {
      res.status = 503;
      res.body = error_body("shutting_down", "service is stopping");
      return;
    }
    if (!ticket) {
      res.status = 503;
      res.body = error_body("overloaded", "inference queue is full");
      return;
    }

    const auto wait = std::chrono::duration<double, std::milli>(cfg_.request_timeout_ms);
    if (ticket->result.wait_for(wait) != std::future_status::ready) {
      ticket->abandoned->store(true);
      res.status = 504;
      res.body = error_body("timeout", "inference did not finish within the request timeout");
      return;
    }

    auto outcome = ticket->result.get();
    if (!outcome.ok) {
      if (outcome.error == "shutting_down" || outcome.error == "abandoned") {
        res.status = 503;
        res.body = error_body("shutting_down", "service is stopping");
      } else {
        res.status = 500;
        res.body = error_body("internal", outcome.error);
      }
      return;
    }

    nlohmann::json body = {
        {"prediction", outcome.prediction_all_activity},
        {"prediction_all_activity", outcome.prediction_all_activity},
        {"prediction_proportion", outcome.prediction_proportion},
        {"total_output_spikes", outcome.total_output_spikes},
        {"no_activity", outcome.no_activity},
        {"inference_ms", outcome.inference_ms},
        {"model_version", worker_.artifact().version},
    };
    res.status = 200;
    res.body = body.dump();
  });

  // Health answers from counters only; it never waits on the worker, so it
  // stays fast while inference is saturated.
  svr.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
    res.set_header("Content-Type", "application/json");
    nlohmann::json body = {
        {"status", ready_ ? "ok" : "unready"},
        {"model_loaded", ready_},
        {"queued", ready_ ? worker_.queued() : 0},
        {"queue_capacity", cfg_.queue_depth},
        {"completed", ready_ ? worker_.completed() : 0},
    };
    res.status = ready_ ? 200 : 503;
    res.body = body.dump();
  });

  svr.Get("/version", [this](const httplib::Request&, httplib::Response& res) {
    res.set_header("Content-Type", "application/json");
    nlohmann::json body = {
        {"service", "spikebench"},
        {"model_version", ready_ ? nlohmann::json(worker_.artifact().version)
                                 : nlohmann::json(nullptr)},
        {"n_exc", ready_ ? nlohmann::json(worker_.artifact().model.n_exc)
                         : nlohmann::json(nullptr)},
    };
    res.status = 200;
    res.body = body.dump();
  });

  if (cfg_.port == 0) {
    bound_port_ = svr.bind_to_any_port(cfg_.host);
    if (bound_port_ <= 0) throw SetupError("service: failed to bind to " + cfg_.host);
  } else {
    if (!svr.bind_to_port(cfg_.host, cfg_.port))
      throw SetupError("service: failed to bind " + cfg_.host + ":" +
                       std::to_string(cfg_.port));
    bound_port_ = cfg_.port;
  }

  listener_ = std::thread([this] { impl_->svr.listen_after_bind(); });
  impl_->svr.wait_until_ready();

  nlohmann::json line = {
      {"event", "service_start"},
      {"port", bound_port_},
      {"model_loaded", ready_},
      {"model_load_ms", model_load_ms_},
      {"model_resident_bytes", ready_ ? worker_.artifact().resident_bytes() : 0},
      {"model_version", ready_ ? worker_.artifact().version : ""},
      {"queue_capacity", cfg_.queue_depth},
  };
  std::cout << line.dump() << std::endl;
}

void Service::stop() {
  bool expected = false;
  if (!stopped_.compare_exchange_strong(expected, true)) return;
  // Drain the worker first so every parked handler gets its response, then
  // stop the listener; httplib joins the handler pool on the way out.
  worker_.shutdown();
  if (impl_ && impl_->svr.is_running()) impl_->svr.stop();
  if (listener_.joinable()) listener_.join();
}

void Service::wait() {
  if (listener_.joinable()) listener_.join();
}

// ---------------------------------------------------------------------------
// Blocking entry point used by the C API / CLI.

namespace {
std::mutex g_serve_mu;
std::condition_variable g_serve_cv;
bool g_stop_requested = false;
}  // namespace

void serve_blocking(const ServiceConfig& cfg) {
  {
    std::lock_guard lock(g_serve_mu);
    g_stop_requested = false;
  }
  Service service(cfg);
  service.start();
  {
    std::unique_lock lock(g_serve_mu);
    g_serve_cv.wait(lock, [] { return g_stop_requested; });
  }
  service.stop();
}

void request_serve_stop() {
  {
    std::lock_guard lock(g_serve_mu);
    g_stop_requested = true;
  }
  g_serve_cv.notify_all();
}

}  // namespace spikebench::serving
