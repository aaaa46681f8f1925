#include "spikebench.h"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <memory>
#include <string>

#include "json.hpp"

#include "core/bench.hpp"
#include "core/encoding.hpp"
#include "core/errors.hpp"
#include "core/mnist.hpp"
#include "core/model_io.hpp"
#include "core/network.hpp"
#include "core/orchsim.hpp"
#include "core/rng.hpp"
#include "core/service.hpp"
#include "core/synthdata.hpp"
#include "core/training.hpp"

using namespace spikebench;

struct sb_model {
  modelio::ModelArtifact artifact;
};

namespace {

thread_local std::string t_last_error = "no error";

sb_status fail(sb_status code, const std::string& message) {
  t_last_error = message;
  return code;
}

// Maps the C++ error taxonomy onto stable C status codes.
sb_status run_guarded(const std::function<sb_status()>& body) {
  try {
    return body();
  } catch (const InvalidArgumentError& e) {
    return fail(SB_ERR_INVALID_ARGUMENT, e.what());
  } catch (const StatError& e) {
    return fail(SB_ERR_INVALID_ARGUMENT, e.what());
  } catch (const IoError& e) {
    return fail(SB_ERR_IO, e.what());
  } catch (const FormatError& e) {
    return fail(SB_ERR_FORMAT, e.what());
  } catch (const DataError& e) {
    return fail(SB_ERR_DATA, e.what());
  } catch (const CorruptError& e) {
    return fail(SB_ERR_CORRUPT, e.what());
  } catch (const VersionError& e) {
    return fail(SB_ERR_VERSION, e.what());
  } catch (const StateError& e) {
    return fail(SB_ERR_STATE, e.what());
  } catch (const SetupError& e) {
    return fail(SB_ERR_SETUP, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(SB_ERR_INVALID_ARGUMENT, std::string("invalid JSON: ") + e.what());
  } catch (const std::exception& e) {
    return fail(SB_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(SB_ERR_RUNTIME, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

nlohmann::json parse_config(const char* json, const char* what) {
  if (json == nullptr || *json == '\0') return nlohmann::json::object();
  auto j = nlohmann::json::parse(json);  // json::exception mapped by run_guarded
  if (!j.is_object())
    throw InvalidArgumentError(std::string(what) + ": config must be a JSON object");
  return j;
}

}  // namespace

extern "C" {

const char* sb_version(void) { return "1.0.0"; }

const char* sb_last_error(void) { return t_last_error.c_str(); }

void sb_string_free(char* s) { std::free(s); }

/* ------------------------------------------------------------------ */

sb_status sb_model_load(const char* path, sb_model** out_model) {
  return run_guarded([&]() -> sb_status {
    if (path == nullptr || out_model == nullptr)
      throw InvalidArgumentError("sb_model_load: path and out_model must not be NULL");
    auto handle = std::make_unique<sb_model>();
    handle->artifact = modelio::load_model(path);
    *out_model = handle.release();
    return SB_OK;
  });
}

sb_status sb_model_save(sb_model* model, const char* path) {
  return run_guarded([&]() -> sb_status {
    if (model == nullptr || path == nullptr)
      throw InvalidArgumentError("sb_model_save: model and path must not be NULL");
    modelio::save_model(model->artifact, path);
    return SB_OK;
  });
}

void sb_model_free(sb_model* model) { delete model; }

sb_status sb_model_info(sb_model* model, char** out_json) {
  return run_guarded([&]() -> sb_status {
    if (model == nullptr || out_json == nullptr)
      throw InvalidArgumentError("sb_model_info: model and out_json must not be NULL");
    const auto& a = model->artifact;
    nlohmann::ordered_json j = {
        {"n_exc", a.model.n_exc},
        {"input_size", a.model.input_size},
        {"labels_assigned", a.model.labels_assigned()},
        {"window_ms", a.window_ms},
        {"intensity", a.intensity_hz},
        {"train_seed", a.train_seed},
        {"trained_samples", a.trained_samples},
        {"version", a.version},
        {"resident_bytes", a.resident_bytes()},
    };
    *out_json = dup_string(j.dump(2));
    return SB_OK;
  });
}

/* ------------------------------------------------------------------ */

sb_status sb_train(const char* config_json, sb_progress_fn progress, void* user_data,
                   sb_model** out_model) {
  return run_guarded([&]() -> sb_status {
    if (out_model == nullptr) throw InvalidArgumentError("sb_train: out_model must not be NULL");
    const auto j = parse_config(config_json, "sb_train");
    if (!j.contains("data_dir"))
      throw InvalidArgumentError("sb_train: config must set data_dir");

    training::TrainConfig cfg;
    cfg.n_exc = j.value("n_exc", cfg.n_exc);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.samples = j.value("samples", cfg.samples);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.intensity_hz = j.value("intensity", cfg.intensity_hz);
    cfg.window_ms = j.value("window_ms", cfg.window_ms);
    cfg.dt_ms = j.value("dt_ms", cfg.dt_ms);
    cfg.label_samples = j.value("label_samples", cfg.label_samples);
    cfg.normalize_target = j.value("normalize_target", cfg.normalize_target);

    const auto ds = data::load_dataset(j.at("data_dir").get<std::string>(), /*train=*/true);

    training::ProgressFn fn;
    if (progress != nullptr)
      fn = [progress, user_data](const std::string& line) { progress(line.c_str(), user_data); };

    auto model = training::train(ds, cfg, fn);
    const auto assignment = training::assign_neuron_labels(model, ds, cfg);
    model.neuron_labels = assignment.labels;

    auto handle = std::make_unique<sb_model>();
    handle->artifact.model = std::move(model);
    handle->artifact.window_ms = cfg.window_ms;
    handle->artifact.intensity_hz = cfg.intensity_hz;
    handle->artifact.train_seed = cfg.seed;
    handle->artifact.trained_samples =
        std::min<std::uint64_t>(cfg.samples, ds.size()) * cfg.epochs;
    *out_model = handle.release();
    return SB_OK;
  });
}

sb_status sb_evaluate(sb_model* model, const char* data_dir, const char* options_json,
                      char** out_report_json) {
  return run_guarded([&]() -> sb_status {
    if (model == nullptr || data_dir == nullptr || out_report_json == nullptr)
      throw InvalidArgumentError(
          "sb_evaluate: model, data_dir and out_report_json must not be NULL");
    const auto j = parse_config(options_json, "sb_evaluate");

    training::EvalOptions opts;
    opts.samples = j.value("samples", opts.samples);
    opts.stratified = j.value("stratified", opts.stratified);
    opts.seed = j.value("seed", opts.seed);
    opts.threads = j.value("threads", opts.threads);
    opts.intensity_hz = j.value("intensity", model->artifact.intensity_hz);
    opts.window_ms = j.value("window_ms", model->artifact.window_ms);

    const auto ds = data::load_dataset(data_dir, /*train=*/false);
    const auto report = training::evaluate(model->artifact.model, ds, opts);
    *out_report_json = dup_string(report.to_json());
    return SB_OK;
  });
}

/* ------------------------------------------------------------------ */

sb_status sb_predict(sb_model* model, const double* pixels, size_t pixel_count, int64_t seed,
                     double intensity, sb_prediction* out) {
  return run_guarded([&]() -> sb_status {
    if (model == nullptr || pixels == nullptr || out == nullptr)
      throw InvalidArgumentError("sb_predict: model, pixels and out must not be NULL");
    auto& artifact = model->artifact;
    if (!artifact.model.labels_assigned())
      throw StateError("sb_predict: model has no neuron labels");
    if (pixel_count != artifact.model.input_size)
      throw InvalidArgumentError("sb_predict: expected " +
                                 std::to_string(artifact.model.input_size) + " pixels, got " +
                                 std::to_string(pixel_count));

    std::uint64_t effective_seed;
    if (seed >= 0) {
      effective_seed = static_cast<std::uint64_t>(seed);
    } else {
      static std::atomic<std::uint64_t> counter{0};
      effective_seed = mix_seed(std::random_device{}(), counter.fetch_add(1));
    }
    const double eff_intensity = intensity > 0.0 ? intensity : artifact.intensity_hz;

    const auto t0 = std::chrono::steady_clock::now();
    const auto spikes = snn::poisson_encode({pixels, pixel_count}, eff_intensity,
                                            artifact.window_ms, artifact.model.exc_params.dt_ms,
                                            effective_seed);
    const auto rec = snn::run_network(artifact.model, spikes, /*learning=*/false);

    out->prediction_all_activity = rec.pred_all_activity;
    out->prediction_proportion = rec.pred_proportion;
    out->total_output_spikes = rec.total_output_spikes;
    out->no_activity = rec.no_activity() ? 1 : 0;
    out->inference_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    return SB_OK;
  });
}

/* ------------------------------------------------------------------ */

sb_status sb_serve(const char* config_json) {
  return run_guarded([&]() -> sb_status {
    const auto j = parse_config(config_json, "sb_serve");
    // Without this check an empty config would block forever serving 503s on
    // the default port, which is a miserable way to discover a typo.
    if (!j.contains("model_path"))
      throw InvalidArgumentError("sb_serve: config must set model_path");
    serving::ServiceConfig cfg;
    cfg.model_path = j.at("model_path").get<std::string>();
    cfg.host = j.value("host", cfg.host);
    cfg.port = j.value("port", cfg.port);
    cfg.queue_depth = j.value("queue_depth", cfg.queue_depth);
    cfg.request_timeout_ms = j.value("request_timeout_ms", cfg.request_timeout_ms);
    serving::serve_blocking(cfg);
    return SB_OK;
  });
}

void sb_serve_stop(void) { serving::request_serve_stop(); }

/* ------------------------------------------------------------------ */

sb_status sb_bench_run(const char* config_json, char** out_report_json) {
  return run_guarded([&]() -> sb_status {
    if (out_report_json == nullptr)
      throw InvalidArgumentError("sb_bench_run: out_report_json must not be NULL");
    const auto j = parse_config(config_json, "sb_bench_run");
    if (!j.contains("url") || !j.contains("data_dir"))
      throw InvalidArgumentError("sb_bench_run: config must set url and data_dir");

    bench::BenchConfig cfg;
    cfg.url = j.at("url").get<std::string>();
    cfg.data_dir = j.at("data_dir").get<std::string>();
    cfg.clients = j.value("clients", cfg.clients);
    cfg.requests_per_client = j.value("requests_per_client", cfg.requests_per_client);
    cfg.timeout_ms = j.value("timeout_ms", cfg.timeout_ms);
    cfg.seed = j.value("seed", cfg.seed);

    const auto test_set = data::load_dataset(cfg.data_dir, /*train=*/false);
    const auto run = bench::run_benchmark(cfg, test_set);

    auto report = bench::compute_report(run.samples, run.duration_s);
    report.config_echo = {
        {"url", cfg.url},           {"clients", cfg.clients},
        {"requests_per_client", cfg.requests_per_client},
        {"timeout_ms", cfg.timeout_ms}, {"seed", cfg.seed},
    };

    if (j.contains("out"))
      bench::export_report(report, j.at("out").get<std::string>(), bench::ReportFormat::json);
    if (j.contains("out_csv"))
      bench::export_report(report, j.at("out_csv").get<std::string>(),
                           bench::ReportFormat::csv);
    if (j.contains("raw_out")) {
      std::ofstream raw(j.at("raw_out").get<std::string>(), std::ios::trunc);
      if (!raw) throw IoError("cannot create " + j.at("raw_out").get<std::string>());
      raw << bench::samples_to_csv(run.samples);
    }

    *out_report_json = dup_string(bench::report_to_string(report, bench::ReportFormat::json));
    return SB_OK;
  });
}

/* ------------------------------------------------------------------ */

sb_status sb_orchsim_run(const char* scenario_json, char** out_report_json) {
  return run_guarded([&]() -> sb_status {
    if (out_report_json == nullptr)
      throw InvalidArgumentError("sb_orchsim_run: out_report_json must not be NULL");
    const auto j = parse_config(scenario_json, "sb_orchsim_run");

    orchsim::SimScenario scenario;
    if (j.contains("scenario_file"))
      scenario = orchsim::load_scenario(j.at("scenario_file").get<std::string>());
    scenario.replicas = j.value("replicas", scenario.replicas);
    scenario.clients = j.value("clients", scenario.clients);
    scenario.requests_per_client = j.value("requests_per_client", scenario.requests_per_client);
    if (j.contains("policy"))
      scenario.policy = orchsim::policy_from_string(j.at("policy").get<std::string>());
    if (j.contains("service"))
      scenario.service = orchsim::ServiceTimeDist::parse(j.at("service").get<std::string>());
    scenario.network_delay_ms = j.value("network_delay_ms", scenario.network_delay_ms);
    scenario.start_jitter_ms = j.value("start_jitter_ms", scenario.start_jitter_ms);
    scenario.seed = j.value("seed", scenario.seed);

    const auto result = orchsim::simulate(scenario);
    auto report = result.to_report(scenario);

    if (j.contains("out"))
      bench::export_report(report, j.at("out").get<std::string>(), bench::ReportFormat::json);

    *out_report_json = dup_string(bench::report_to_string(report, bench::ReportFormat::json));
    return SB_OK;
  });
}

/* ------------------------------------------------------------------ */

sb_status sb_synthdata_write(const char* out_dir, uint32_t train_per_class,
                             uint32_t test_per_class, uint64_t seed, int gzip) {
  return run_guarded([&]() -> sb_status {
    if (out_dir == nullptr) throw InvalidArgumentError("sb_synthdata_write: out_dir is NULL");
    if (train_per_class == 0 || test_per_class == 0)
      throw InvalidArgumentError("sb_synthdata_write: per-class counts must be > 0");
    const auto train = data::synthesize_digits(train_per_class, mix_seed(seed, 't', 0));
    const auto test = data::synthesize_digits(test_per_class, mix_seed(seed, 'v', 0));
    data::save_dataset(out_dir, train, /*train=*/true, gzip != 0);
    data::save_dataset(out_dir, test, /*train=*/false, gzip != 0);
    return SB_OK;
  });
}

} /* extern "C" */
