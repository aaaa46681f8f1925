#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "core/mnist.hpp"
#include "core/network.hpp"

namespace spikebench::training {

struct TrainConfig {
  std::uint32_t n_exc = 400;
  std::uint32_t epochs = 1;
  // Per-epoch cap on presented samples; 0 trains on nothing and returns the
  // freshly initialized network.
  std::uint64_t samples = 60000;
  double intensity_hz = 64.0;
  double window_ms = 100.0;
  double dt_ms = 1.0;
  std::uint64_t seed = 0;
  double normalize_target = 78.4;
  snn::InhibitionSchedule inhibition;
  snn::StdpRates stdp;
  // Samples replayed with learning off to vote on neuron labels.
  std::uint64_t label_samples = 10000;
  std::uint64_t progress_every = 1000;

  void validate() const;
};

// Receives one JSON object per line of progress output.
using ProgressFn = std::function<void(const std::string& json_line)>;

// Unsupervised STDP pass over the dataset: encode, run with learning on,
// renormalize input columns after every sample, step the inhibition ramp on
// its schedule. Labels are not assigned here.
snn::NetworkModel train(const data::Dataset& ds, const TrainConfig& cfg,
                        const ProgressFn& progress = {});

struct LabelAssignment {
  std::vector<std::int16_t> labels;
  // Neurons that never spiked during the labeling pass; they default to
  // digit 0 but carry no information.
  std::uint32_t unassigned = 0;
};

// Replays up to cfg.label_samples samples with learning off and gives each
// excitatory neuron the digit it responds to most strongly (mean spike count
// per presentation, ties to the lower digit). Needs every digit present in
// the subset. The model passed in is not modified.
LabelAssignment assign_neuron_labels(const snn::NetworkModel& model, const data::Dataset& ds,
                                     const TrainConfig& cfg);

struct EvalOptions {
  // 0 = every sample in the dataset.
  std::uint64_t samples = 0;
  bool stratified = true;
  std::uint64_t seed = 0;
  std::uint32_t threads = 0;  // 0 = hardware concurrency, capped at 8
  double intensity_hz = 64.0;
  double window_ms = 100.0;
};

struct DigitAccuracy {
  std::uint32_t count = 0;
  std::uint32_t correct_all_activity = 0;
  std::uint32_t correct_proportion = 0;
};

struct AccuracyReport {
  std::uint64_t samples = 0;
  double overall_all_activity = 0.0;
  double overall_proportion = 0.0;
  std::array<DigitAccuracy, 10> per_digit{};
  std::uint64_t no_activity_count = 0;
  double wall_s = 0.0;

  std::string to_json() const;  // pretty-printed, stable key order
};

// Scores the model on (a stratified subset of) the dataset with both
// decoders. Deterministic in (model, dataset, options) regardless of thread
// count: every sample gets its own seed derived from its dataset index, and
// per-digit tallies are integers merged in index order. The model passed in
// is never modified (each worker steps a private copy).
AccuracyReport evaluate(const snn::NetworkModel& model, const data::Dataset& ds,
                        const EvalOptions& opts);

}  // namespace spikebench::training
