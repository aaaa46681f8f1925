#include "core/training.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <thread>

#include "json.hpp"

#include "core/decode.hpp"
#include "core/encoding.hpp"
#include "core/errors.hpp"
#include "core/rng.hpp"

namespace spikebench::training {

namespace {

// Seed stream tags so training, labeling and evaluation draw from disjoint
// random streams even under the same base seed.
constexpr std::uint64_t kTrainStream = 0x54524e;  // "TRN"
constexpr std::uint64_t kLabelStream = 0x4c4142;  // "LAB"
constexpr std::uint64_t kEvalStream = 0x45564c;   // "EVL"

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::uint32_t effective_threads(std::uint32_t requested, std::size_t work_items) {
  std::uint32_t t = requested;
  if (t == 0) t = std::min(8u, std::max(1u, std::thread::hardware_concurrency()));
  return static_cast<std::uint32_t>(std::min<std::size_t>(t, std::max<std::size_t>(1, work_items)));
}

std::vector<std::size_t> pick_indices(const data::Dataset& ds, std::uint64_t samples,
                                      bool stratified) {
  if (samples == 0 || samples >= ds.size()) {
    std::vector<std::size_t> all(ds.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  if (stratified) return data::stratified_indices(ds, samples);
  std::vector<std::size_t> head(samples);
  std::iota(head.begin(), head.end(), std::size_t{0});
  return head;
}

}  // namespace

void TrainConfig::validate() const {
  if (n_exc == 0) throw InvalidArgumentError("TrainConfig: n_exc must be > 0");
  if (epochs == 0) throw InvalidArgumentError("TrainConfig: epochs must be > 0");
  if (!(intensity_hz > 0.0)) throw InvalidArgumentError("TrainConfig: intensity must be > 0");
  if (!(window_ms > 0.0)) throw InvalidArgumentError("TrainConfig: window_ms must be > 0");
  if (!(dt_ms > 0.0)) throw InvalidArgumentError("TrainConfig: dt_ms must be > 0");
  if (!(normalize_target > 0.0))
    throw InvalidArgumentError("TrainConfig: normalize_target must be > 0");
}

snn::NetworkModel train(const data::Dataset& ds, const TrainConfig& cfg,
                        const ProgressFn& progress) {
  cfg.validate();
  if (ds.size() == 0) throw InvalidArgumentError("train: dataset is empty");
  ds.validate();

  auto model = snn::NetworkModel::make(cfg.n_exc, cfg.seed,
                                       static_cast<std::uint32_t>(ds.pixels_per_image()),
                                       cfg.dt_ms);
  model.normalize_target = cfg.normalize_target;
  model.inhibition = cfg.inhibition;
  model.stdp = cfg.stdp;
  snn::update_inhibition(model, 0);

  const std::uint64_t per_epoch = std::min<std::uint64_t>(cfg.samples, ds.size());
  const std::uint64_t total = per_epoch * cfg.epochs;
  const auto t0 = std::chrono::steady_clock::now();

  std::uint64_t processed = 0;
  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::uint64_t i = 0; i < per_epoch; ++i) {
      const auto image = ds.image_as_doubles(i);
      const auto spikes =
          snn::poisson_encode(image, cfg.intensity_hz, cfg.window_ms, cfg.dt_ms,
                              mix_seed(cfg.seed, kTrainStream + epoch, i));
      snn::run_network(model, spikes, /*learning=*/true);
      snn::normalize_input_weights(model, cfg.normalize_target);
      ++processed;

      if (model.inhibition.update_interval != 0 &&
          processed % model.inhibition.update_interval == 0)
        snn::update_inhibition(model, processed);

      if (progress && cfg.progress_every != 0 && processed % cfg.progress_every == 0) {
        nlohmann::json line = {
            {"event", "train_progress"},
            {"samples_processed", processed},
            {"samples_total", total},
            {"epoch", epoch},
            {"inhibition_magnitude", model.inhibition.magnitude_at(processed)},
            {"elapsed_s", seconds_since(t0)},
        };
        progress(line.dump());
      }
    }
  }

  if (progress) {
    nlohmann::json line = {
        {"event", "train_done"},
        {"samples_processed", processed},
        {"elapsed_s", seconds_since(t0)},
    };
    progress(line.dump());
  }
  return model;
}

LabelAssignment assign_neuron_labels(const snn::NetworkModel& model, const data::Dataset& ds,
                                     const TrainConfig& cfg) {
  if (ds.size() == 0) throw InvalidArgumentError("assign_neuron_labels: dataset is empty");
  const auto indices = pick_indices(ds, cfg.label_samples, /*stratified=*/false);

  {
    std::array<bool, 10> seen{};
    for (auto i : indices) seen[ds.labels[i]] = true;
    for (int d = 0; d < 10; ++d)
      if (!seen[d])
        throw DataError("assign_neuron_labels: digit " + std::to_string(d) +
                        " missing from the labeling subset");
  }

  const std::size_t n = model.n_exc;
  // Integer tallies so the merge is exact and independent of sharding.
  std::vector<std::array<std::int64_t, 10>> spikes_by_class(n, std::array<std::int64_t, 10>{});
  std::array<std::int64_t, 10> presentations{};

  const std::uint32_t nthreads = effective_threads(0, indices.size());
  std::vector<std::vector<std::array<std::int64_t, 10>>> shard_spikes(
      nthreads, std::vector<std::array<std::int64_t, 10>>(n, std::array<std::int64_t, 10>{}));
  std::vector<std::thread> pool;
  pool.reserve(nthreads);

  for (std::uint32_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t]() {
      auto local = model;  // private copy; run_network mutates transient state
      for (std::size_t k = t; k < indices.size(); k += nthreads) {
        const std::size_t idx = indices[k];
        const auto image = ds.image_as_doubles(idx);
        const auto train_spikes =
            snn::poisson_encode(image, cfg.intensity_hz, cfg.window_ms, cfg.dt_ms,
                                mix_seed(cfg.seed, kLabelStream, idx));
        const auto rec = snn::run_network(local, train_spikes, /*learning=*/false);
        const int digit = ds.labels[idx];
        for (std::size_t nrn = 0; nrn < n; ++nrn)
          shard_spikes[t][nrn][digit] += rec.exc_spike_counts[nrn];
      }
    });
  }
  for (auto& th : pool) th.join();

  for (auto i : indices) presentations[ds.labels[i]] += 1;
  for (std::uint32_t t = 0; t < nthreads; ++t)
    for (std::size_t nrn = 0; nrn < n; ++nrn)
      for (int d = 0; d < 10; ++d) spikes_by_class[nrn][d] += shard_spikes[t][nrn][d];

  LabelAssignment out;
  out.labels.assign(n, 0);
  for (std::size_t nrn = 0; nrn < n; ++nrn) {
    std::int64_t any = 0;
    int best = 0;
    double best_rate = -1.0;
    for (int d = 0; d < 10; ++d) {
      any += spikes_by_class[nrn][d];
      const double rate =
          static_cast<double>(spikes_by_class[nrn][d]) / static_cast<double>(presentations[d]);
      if (rate > best_rate) {
        best_rate = rate;
        best = d;
      }
    }
    if (any == 0) {
      out.labels[nrn] = 0;
      out.unassigned += 1;
    } else {
      out.labels[nrn] = static_cast<std::int16_t>(best);
    }
  }
  return out;
}

AccuracyReport evaluate(const snn::NetworkModel& model, const data::Dataset& ds,
                        const EvalOptions& opts) {
  if (!model.labels_assigned()) throw StateError("evaluate: model has no neuron labels");
  if (ds.size() == 0) throw InvalidArgumentError("evaluate: dataset is empty");
  const auto t0 = std::chrono::steady_clock::now();
  const auto indices = pick_indices(ds, opts.samples, opts.stratified);

  struct PerSample {
    std::int8_t truth = 0;
    std::int8_t pred_all = 0;
    std::int8_t pred_prop = 0;
    bool silent = false;
  };
  std::vector<PerSample> results(indices.size());

  const std::uint32_t nthreads = effective_threads(opts.threads, indices.size());
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::uint32_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t]() {
      auto local = model;
      for (std::size_t k = t; k < indices.size(); k += nthreads) {
        const std::size_t idx = indices[k];
        const auto image = ds.image_as_doubles(idx);
        // Seeded by dataset index, not loop position: the per-sample outcome
        // is the same no matter which subset it appears in.
        const auto spikes =
            snn::poisson_encode(image, opts.intensity_hz, opts.window_ms,
                                local.exc_params.dt_ms, mix_seed(opts.seed, kEvalStream, idx));
        const auto rec = snn::run_network(local, spikes, /*learning=*/false);
        results[k] = {static_cast<std::int8_t>(ds.labels[idx]),
                      static_cast<std::int8_t>(rec.pred_all_activity),
                      static_cast<std::int8_t>(rec.pred_proportion), rec.no_activity()};
      }
    });
  }
  for (auto& th : pool) th.join();

  AccuracyReport rep;
  rep.samples = results.size();
  std::uint64_t ok_all = 0, ok_prop = 0;
  for (const auto& r : results) {
    auto& d = rep.per_digit[r.truth];
    d.count += 1;
    if (r.pred_all == r.truth) {
      d.correct_all_activity += 1;
      ++ok_all;
    }
    if (r.pred_prop == r.truth) {
      d.correct_proportion += 1;
      ++ok_prop;
    }
    if (r.silent) rep.no_activity_count += 1;
  }
  if (rep.samples > 0) {
    rep.overall_all_activity = static_cast<double>(ok_all) / rep.samples;
    rep.overall_proportion = static_cast<double>(ok_prop) / rep.samples;
  }
  rep.wall_s = seconds_since(t0);
  return rep;
}

std::string AccuracyReport::to_json() const {
  nlohmann::ordered_json j;
  j["samples"] = samples;
  j["overall_all_activity"] = overall_all_activity;
  j["overall_proportion"] = overall_proportion;
  j["no_activity_count"] = no_activity_count;
  j["wall_s"] = wall_s;
  j["per_digit"] = nlohmann::ordered_json::array();
  for (int d = 0; d < 10; ++d) {
    const auto& p = per_digit[d];
    nlohmann::ordered_json entry;
    entry["digit"] = d;
    entry["count"] = p.count;
    if (p.count > 0) {
      entry["all_activity"] = static_cast<double>(p.correct_all_activity) / p.count;
      entry["proportion"] = static_cast<double>(p.correct_proportion) / p.count;
    } else {
      entry["all_activity"] = nullptr;
      entry["proportion"] = nullptr;
    }
    j["per_digit"].push_back(entry);
  }
  return j.dump(2);
}

}  // namespace spikebench::training
