// spikebench command line: train, evaluate, serve, benchmark, simulate.
// Talks to the library exclusively through the C interface in spikebench.h.

#include <semaphore.h>

#include <csignal>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "spikebench.h"

namespace {

int report_failure(const char* what, sb_status rc) {
  std::cerr << what << " failed (status " << static_cast<int>(rc) << "): " << sb_last_error()
            << "\n";
  return 1;
}

void print_progress(const char* json_line, void*) { std::cout << json_line << "\n"; }

// Signal-to-thread bridge for graceful shutdown: sem_post is one of the few
// things safely callable from a signal handler.
sem_t g_stop_sem;
void on_stop_signal(int) { sem_post(&g_stop_sem); }

struct TrainArgs {
  std::string data_dir;
  std::string out = "model.bin";
  std::uint32_t n_exc = 400;
  std::uint64_t samples = 60000;
  std::uint32_t epochs = 1;
  std::uint64_t seed = 0;
  double intensity = 64.0;
  double window_ms = 100.0;
  double dt_ms = 1.0;
  std::uint64_t label_samples = 10000;
};

int cmd_train(const TrainArgs& a) {
  nlohmann::json cfg = {
      {"data_dir", a.data_dir}, {"n_exc", a.n_exc},         {"samples", a.samples},
      {"epochs", a.epochs},     {"seed", a.seed},           {"intensity", a.intensity},
      {"window_ms", a.window_ms}, {"dt_ms", a.dt_ms},       {"label_samples", a.label_samples},
  };
  sb_model* model = nullptr;
  if (auto rc = sb_train(cfg.dump().c_str(), print_progress, nullptr, &model); rc != SB_OK)
    return report_failure("train", rc);
  if (auto rc = sb_model_save(model, a.out.c_str()); rc != SB_OK) {
    sb_model_free(model);
    return report_failure("model save", rc);
  }
  char* info = nullptr;
  if (sb_model_info(model, &info) == SB_OK) {
    std::cout << info << "\n";
    sb_string_free(info);
  }
  sb_model_free(model);
  std::cout << "model written to " << a.out << "\n";
  return 0;
}

struct EvalArgs {
  std::string model_path;
  std::string data_dir;
  std::string report_path;
  std::uint64_t samples = 10000;
  std::uint64_t seed = 0;
  std::uint32_t threads = 0;
  bool no_stratified = false;
};

int cmd_evaluate(const EvalArgs& a) {
  sb_model* model = nullptr;
  if (auto rc = sb_model_load(a.model_path.c_str(), &model); rc != SB_OK)
    return report_failure("model load", rc);
  nlohmann::json opts = {{"samples", a.samples},
                         {"seed", a.seed},
                         {"threads", a.threads},
                         {"stratified", !a.no_stratified}};
  char* report = nullptr;
  const auto rc = sb_evaluate(model, a.data_dir.c_str(), opts.dump().c_str(), &report);
  sb_model_free(model);
  if (rc != SB_OK) return report_failure("evaluate", rc);

  std::cout << report << "\n";
  if (!a.report_path.empty()) {
    std::ofstream out(a.report_path, std::ios::trunc);
    if (!out) {
      std::cerr << "cannot write report to " << a.report_path << "\n";
      sb_string_free(report);
      return 1;
    }
    out << report << "\n";
    std::cout << "report written to " << a.report_path << "\n";
  }
  sb_string_free(report);
  return 0;
}

struct ServeArgs {
  std::string model_path;
  std::string host = "0.0.0.0";
  int port = 8080;
  std::uint32_t queue_depth = 64;
  double timeout_ms = 120000.0;
};

int cmd_serve(const ServeArgs& a) {
  sem_init(&g_stop_sem, 0, 0);
  std::signal(SIGINT, on_stop_signal);
  std::signal(SIGTERM, on_stop_signal);
  std::thread([] {
    sem_wait(&g_stop_sem);
    sb_serve_stop();
  }).detach();

  nlohmann::json cfg = {{"model_path", a.model_path},
                        {"host", a.host},
                        {"port", a.port},
                        {"queue_depth", a.queue_depth},
                        {"request_timeout_ms", a.timeout_ms}};
  const auto rc = sb_serve(cfg.dump().c_str());
  sem_post(&g_stop_sem);  // unblock the watcher if no signal ever arrived
  if (rc != SB_OK) return report_failure("serve", rc);
  return 0;
}

struct BenchArgs {
  std::string url;
  std::string data_dir;
  std::uint32_t clients = 1;
  std::uint32_t requests = 50;
  std::uint64_t seed = 0;
  double timeout_ms = 120000.0;
  std::string out;
  std::string out_csv;
  std::string raw_out;
};

int cmd_bench(const BenchArgs& a) {
  nlohmann::json cfg = {{"url", a.url},
                        {"data_dir", a.data_dir},
                        {"clients", a.clients},
                        {"requests_per_client", a.requests},
                        {"timeout_ms", a.timeout_ms},
                        {"seed", a.seed}};
  if (!a.out.empty()) cfg["out"] = a.out;
  if (!a.out_csv.empty()) cfg["out_csv"] = a.out_csv;
  if (!a.raw_out.empty()) cfg["raw_out"] = a.raw_out;

  char* report = nullptr;
  if (auto rc = sb_bench_run(cfg.dump().c_str(), &report); rc != SB_OK)
    return report_failure("bench", rc);
  std::cout << report;
  sb_string_free(report);
  return 0;
}

struct OrchsimArgs {
  std::uint32_t replicas = 1;
  std::uint32_t clients = 1;
  std::uint32_t requests = 50;
  std::string policy = "round_robin";
  std::string service = "lognormal:749:0.055";
  double delay_ms = 0.0;
  double jitter_ms = 50.0;
  std::uint64_t seed = 0;
  std::string scenario_file;
  std::string out;
};

int cmd_orchsim(const OrchsimArgs& a) {
  nlohmann::json cfg = {{"replicas", a.replicas},
                        {"clients", a.clients},
                        {"requests_per_client", a.requests},
                        {"policy", a.policy},
                        {"service", a.service},
                        {"network_delay_ms", a.delay_ms},
                        {"start_jitter_ms", a.jitter_ms},
                        {"seed", a.seed}};
  if (!a.scenario_file.empty()) cfg["scenario_file"] = a.scenario_file;
  if (!a.out.empty()) cfg["out"] = a.out;

  char* report = nullptr;
  if (auto rc = sb_orchsim_run(cfg.dump().c_str(), &report); rc != SB_OK)
    return report_failure("orchsim", rc);
  std::cout << report;
  sb_string_free(report);
  return 0;
}

struct SynthArgs {
  std::string out_dir;
  std::uint32_t train_per_class = 1000;
  std::uint32_t test_per_class = 100;
  std::uint64_t seed = 0;
  bool gzip = false;
};

int cmd_synthdata(const SynthArgs& a) {
  if (auto rc = sb_synthdata_write(a.out_dir.c_str(), a.train_per_class, a.test_per_class,
                                   a.seed, a.gzip ? 1 : 0);
      rc != SB_OK)
    return report_failure("synthdata", rc);
  std::cout << "wrote " << a.train_per_class * 10 << " train and " << a.test_per_class * 10
            << " test images to " << a.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("spikebench ") + sb_version() +
               ": spiking-network digit classifier and serving toolkit"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train a model with unsupervised STDP");
  train->add_option("--data-dir", train_args.data_dir, "Directory with IDX training files")
      ->required();
  train->add_option("--out", train_args.out, "Output model path");
  train->add_option("--n-exc", train_args.n_exc, "Excitatory neuron count");
  train->add_option("--samples", train_args.samples, "Training samples per epoch");
  train->add_option("--epochs", train_args.epochs, "Passes over the training set");
  train->add_option("--seed", train_args.seed, "Random seed");
  train->add_option("--intensity", train_args.intensity, "Encoding rate ceiling (Hz)");
  train->add_option("--window", train_args.window_ms, "Presentation window (ms)");
  train->add_option("--dt", train_args.dt_ms, "Simulation step (ms)");
  train->add_option("--label-samples", train_args.label_samples,
                    "Samples used to vote neuron labels");

  EvalArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "Score a model on the test split");
  evaluate->add_option("--model", eval_args.model_path, "Model file")->required();
  evaluate->add_option("--data-dir", eval_args.data_dir, "Directory with IDX test files")
      ->required();
  evaluate->add_option("--samples", eval_args.samples, "Test samples (0 = all)");
  evaluate->add_option("--seed", eval_args.seed, "Random seed");
  evaluate->add_option("--threads", eval_args.threads, "Worker threads (0 = auto)");
  evaluate->add_option("--report", eval_args.report_path, "Write the report JSON here");
  evaluate->add_flag("--no-stratified", eval_args.no_stratified,
                     "Take the first N samples instead of a stratified subset");

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "Run the HTTP inference service");
  serve->add_option("--model", serve_args.model_path, "Model file")->envname("MODEL_PATH");
  serve->add_option("--host", serve_args.host, "Bind address");
  serve->add_option("--port", serve_args.port, "Listen port")->envname("PORT");
  serve->add_option("--queue-depth", serve_args.queue_depth, "Waiting-request limit")
      ->envname("QUEUE_DEPTH");
  serve->add_option("--timeout-ms", serve_args.timeout_ms, "Per-request timeout (ms)")
      ->envname("REQUEST_TIMEOUT_MS");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Closed-loop load test against a running service");
  bench->add_option("--url", bench_args.url, "Service base URL")->required();
  bench->add_option("--data-dir", bench_args.data_dir, "Directory with IDX test files")
      ->required();
  bench->add_option("--clients", bench_args.clients, "Concurrent closed-loop clients");
  bench->add_option("--requests", bench_args.requests, "Requests per client");
  bench->add_option("--seed", bench_args.seed, "Payload selection seed");
  bench->add_option("--timeout-ms", bench_args.timeout_ms, "Client request timeout (ms)");
  bench->add_option("--out", bench_args.out, "Write the report JSON here");
  bench->add_option("--csv", bench_args.out_csv, "Write the report as flat CSV here");
  bench->add_option("--raw", bench_args.raw_out, "Write the per-request sample dump here");

  OrchsimArgs orch_args;
  auto* orchsim = app.add_subcommand("orchsim", "Discrete-event replica scheduling simulator");
  orchsim->add_option("--replicas", orch_args.replicas, "Replica count");
  orchsim->add_option("--clients", orch_args.clients, "Closed-loop clients");
  orchsim->add_option("--requests", orch_args.requests, "Requests per client");
  orchsim->add_option("--policy", orch_args.policy,
                      "round_robin | least_connections | random");
  orchsim->add_option("--service", orch_args.service,
                      "deterministic:MS | lognormal:MEDIAN:SIGMA | empirical:FILE");
  orchsim->add_option("--delay", orch_args.delay_ms, "One-way network delay (ms)");
  orchsim->add_option("--jitter", orch_args.jitter_ms, "Client start jitter (ms)");
  orchsim->add_option("--seed", orch_args.seed, "Random seed");
  orchsim->add_option("--scenario", orch_args.scenario_file,
                      "Load a key = value scenario file (flags override it)");
  orchsim->add_option("--out", orch_args.out, "Write the report JSON here");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synthdata", "Generate a synthetic IDX digit corpus");
  synth->add_option("--out-dir", synth_args.out_dir, "Output directory")->required();
  synth->add_option("--train-per-class", synth_args.train_per_class,
                    "Training images per digit");
  synth->add_option("--test-per-class", synth_args.test_per_class, "Test images per digit");
  synth->add_option("--seed", synth_args.seed, "Random seed");
  synth->add_flag("--gzip", synth_args.gzip, "Write gzip-compressed IDX files");

  CLI11_PARSE(app, argc, argv);

  if (train->parsed()) return cmd_train(train_args);
  if (evaluate->parsed()) return cmd_evaluate(eval_args);
  if (serve->parsed()) return cmd_serve(serve_args);
  if (bench->parsed()) return cmd_bench(bench_args);
  if (orchsim->parsed()) return cmd_orchsim(orch_args);
  if (synth->parsed()) return cmd_synthdata(synth_args);
  return 0;
}
