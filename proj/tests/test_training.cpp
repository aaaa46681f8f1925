#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "core/errors.hpp"
#include "core/synthdata.hpp"
#include "core/training.hpp"

using namespace spikebench;
using namespace spikebench::training;
using spikebench::data::Dataset;
using spikebench::data::synthesize_digits;

namespace {

// Small corpus and network so each case stays in the tens of milliseconds.
TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.n_exc = 16;
  cfg.samples = 40;
  cfg.window_ms = 50.0;
  cfg.intensity_hz = 128.0;
  cfg.seed = 21;
  cfg.label_samples = 40;
  cfg.progress_every = 10;
  return cfg;
}

}  // namespace

TEST_CASE("zero samples returns the freshly initialized network") {
  const auto ds = synthesize_digits(2, 3);
  auto cfg = tiny_config();
  cfg.samples = 0;

  const auto trained = train(ds, cfg);
  const auto fresh = snn::NetworkModel::make(cfg.n_exc, cfg.seed);
  CHECK(trained.syn_input_exc.weights.v == fresh.syn_input_exc.weights.v);
  CHECK(trained.exc_state.theta == std::vector<double>(cfg.n_exc, 0.0));
}

TEST_CASE("training is deterministic in the seed") {
  const auto ds = synthesize_digits(4, 3);
  const auto cfg = tiny_config();

  const auto a = train(ds, cfg);
  const auto b = train(ds, cfg);
  CHECK(a.syn_input_exc.weights.v == b.syn_input_exc.weights.v);
  CHECK(a.exc_state.theta == b.exc_state.theta);

  auto cfg2 = cfg;
  cfg2.seed = 22;
  const auto c = train(ds, cfg2);
  CHECK(a.syn_input_exc.weights.v != c.syn_input_exc.weights.v);
}

TEST_CASE("training moves weights, keeps normalization, steps inhibition") {
  const auto ds = synthesize_digits(4, 3);
  auto cfg = tiny_config();
  cfg.inhibition.update_interval = 10;  // ramp visible within 40 samples

  const auto fresh = snn::NetworkModel::make(cfg.n_exc, cfg.seed);
  const auto m = train(ds, cfg);

  CHECK(m.syn_input_exc.weights.v != fresh.syn_input_exc.weights.v);

  // Column sums still on target after the final renormalization.
  for (std::size_t j = 0; j < cfg.n_exc; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < 784; ++i) sum += m.syn_input_exc.weights.at(i, j);
    CHECK(sum == doctest::Approx(cfg.normalize_target).epsilon(1e-9));
  }

  // 40 samples / interval 10 = 4 increments of 0.25 past the initial 10.
  const double expect = -(10.0 + 4 * 0.25);
  CHECK(m.syn_inh_exc.weights.at(0, 1) == expect);
  CHECK(m.syn_inh_exc.weights.at(0, 0) == 0.0);
}

TEST_CASE("progress callback emits parseable checkpoints") {
  const auto ds = synthesize_digits(4, 3);
  const auto cfg = tiny_config();

  std::vector<nlohmann::json> events;
  train(ds, cfg, [&](const std::string& line) { events.push_back(nlohmann::json::parse(line)); });

  REQUIRE(!events.empty());
  std::size_t progress_count = 0;
  bool saw_done = false;
  for (const auto& e : events) {
    const std::string kind = e.at("event");
    if (kind == "train_progress") {
      ++progress_count;
      CHECK(e.at("samples_processed").get<std::uint64_t>() <= 40);
      CHECK(e.at("samples_total").get<std::uint64_t>() == 40);
      CHECK(e.at("inhibition_magnitude").get<double>() >= 10.0);
    } else if (kind == "train_done") {
      saw_done = true;
    }
  }
  CHECK(progress_count == 4);  // every 10 of 40 samples
  CHECK(saw_done);
}

TEST_CASE("training on an empty dataset is an error") {
  Dataset empty;
  CHECK_THROWS_AS(train(empty, tiny_config()), InvalidArgumentError);
}

TEST_CASE("label assignment covers every neuron and leaves the model alone") {
  const auto ds = synthesize_digits(4, 3);
  const auto cfg = tiny_config();
  const auto m = train(ds, cfg);
  const auto weights_before = m.syn_input_exc.weights.v;

  const auto assignment = assign_neuron_labels(m, ds, cfg);
  REQUIRE(assignment.labels.size() == cfg.n_exc);
  for (auto l : assignment.labels) {
    CHECK(l >= 0);
    CHECK(l <= 9);
  }
  CHECK(assignment.unassigned <= cfg.n_exc);
  CHECK(m.syn_input_exc.weights.v == weights_before);

  // Same call, same answer.
  const auto again = assign_neuron_labels(m, ds, cfg);
  CHECK(assignment.labels == again.labels);
  CHECK(assignment.unassigned == again.unassigned);
}

TEST_CASE("label assignment needs every digit represented") {
  auto ds = synthesize_digits(4, 3);
  const auto cfg = tiny_config();
  const auto m = train(ds, cfg);

  // Restrict the labeling window to fewer samples than digits.
  auto starved = cfg;
  starved.label_samples = 5;
  CHECK_THROWS_AS(assign_neuron_labels(m, ds, starved), DataError);
}

TEST_CASE("evaluation is deterministic and thread-count invariant") {
  const auto ds = synthesize_digits(6, 3);
  auto cfg = tiny_config();
  auto m = train(ds, cfg);
  m.neuron_labels = assign_neuron_labels(m, ds, cfg).labels;

  EvalOptions opts;
  opts.samples = 30;
  opts.seed = 5;
  opts.intensity_hz = cfg.intensity_hz;
  opts.window_ms = cfg.window_ms;

  opts.threads = 1;
  const auto single = evaluate(m, ds, opts);
  opts.threads = 4;
  const auto multi = evaluate(m, ds, opts);

  // Everything except wall time must match across thread counts.
  CHECK(single.samples == multi.samples);
  CHECK(single.overall_all_activity == multi.overall_all_activity);
  CHECK(single.overall_proportion == multi.overall_proportion);
  CHECK(single.no_activity_count == multi.no_activity_count);
  for (int d = 0; d < 10; ++d) {
    CHECK(single.per_digit[d].count == multi.per_digit[d].count);
    CHECK(single.per_digit[d].correct_all_activity == multi.per_digit[d].correct_all_activity);
    CHECK(single.per_digit[d].correct_proportion == multi.per_digit[d].correct_proportion);
  }
}

TEST_CASE("evaluation does not modify the model") {
  const auto ds = synthesize_digits(4, 3);
  auto cfg = tiny_config();
  auto m = train(ds, cfg);
  m.neuron_labels = assign_neuron_labels(m, ds, cfg).labels;

  const auto weights_before = m.syn_input_exc.weights.v;
  const auto theta_before = m.exc_state.theta;

  EvalOptions opts;
  opts.samples = 20;
  opts.intensity_hz = cfg.intensity_hz;
  opts.window_ms = cfg.window_ms;
  evaluate(m, ds, opts);

  CHECK(m.syn_input_exc.weights.v == weights_before);
  CHECK(m.exc_state.theta == theta_before);
}

TEST_CASE("stratified evaluation balances per-digit counts") {
  const auto ds = synthesize_digits(6, 3);
  auto cfg = tiny_config();
  auto m = train(ds, cfg);
  m.neuron_labels = assign_neuron_labels(m, ds, cfg).labels;

  EvalOptions opts;
  opts.samples = 30;
  opts.stratified = true;
  opts.intensity_hz = cfg.intensity_hz;
  opts.window_ms = cfg.window_ms;
  const auto report = evaluate(m, ds, opts);

  CHECK(report.samples == 30);
  std::uint64_t total = 0, correct_aa = 0, correct_pr = 0;
  for (int d = 0; d < 10; ++d) {
    CHECK(report.per_digit[d].count == 3);
    total += report.per_digit[d].count;
    correct_aa += report.per_digit[d].correct_all_activity;
    correct_pr += report.per_digit[d].correct_proportion;
  }
  CHECK(total == report.samples);

  // Overall accuracy is exactly the weighted per-digit aggregate.
  CHECK(report.overall_all_activity ==
        doctest::Approx(static_cast<double>(correct_aa) / 30.0).epsilon(1e-12));
  CHECK(report.overall_proportion ==
        doctest::Approx(static_cast<double>(correct_pr) / 30.0).epsilon(1e-12));
}

TEST_CASE("per-sample seeds are keyed by dataset index, not subset position") {
  const auto ds = synthesize_digits(6, 3);
  auto cfg = tiny_config();
  auto m = train(ds, cfg);
  m.neuron_labels = assign_neuron_labels(m, ds, cfg).labels;

  // The interleaved corpus puts the first three of every digit at dataset
  // indices 0..29, which is exactly what a stratified 30-sample subset picks.
  // Evaluating those samples as a subset of the full corpus and as a
  // standalone 30-sample dataset must agree tally for tally, because each
  // sample's encoder seed comes from its dataset index.
  EvalOptions opts;
  opts.samples = 30;
  opts.seed = 17;
  opts.intensity_hz = cfg.intensity_hz;
  opts.window_ms = cfg.window_ms;
  const auto subset_run = evaluate(m, ds, opts);

  Dataset head;
  head.rows = ds.rows;
  head.cols = ds.cols;
  head.images.assign(ds.images.begin(),
                     ds.images.begin() + 30 * static_cast<long>(ds.pixels_per_image()));
  head.labels.assign(ds.labels.begin(), ds.labels.begin() + 30);
  auto all_opts = opts;
  all_opts.samples = 0;
  const auto standalone_run = evaluate(m, head, all_opts);

  CHECK(subset_run.samples == standalone_run.samples);
  CHECK(subset_run.overall_all_activity == standalone_run.overall_all_activity);
  CHECK(subset_run.overall_proportion == standalone_run.overall_proportion);
  CHECK(subset_run.no_activity_count == standalone_run.no_activity_count);
  for (int d = 0; d < 10; ++d) {
    CHECK(subset_run.per_digit[d].count == standalone_run.per_digit[d].count);
    CHECK(subset_run.per_digit[d].correct_all_activity ==
          standalone_run.per_digit[d].correct_all_activity);
    CHECK(subset_run.per_digit[d].correct_proportion ==
          standalone_run.per_digit[d].correct_proportion);
  }
}

TEST_CASE("evaluation without labels is rejected") {
  const auto ds = synthesize_digits(2, 3);
  const auto cfg = tiny_config();
  const auto m = train(ds, cfg);  // no labels assigned
  CHECK_THROWS_AS(evaluate(m, ds, EvalOptions{}), StateError);
}

TEST_CASE("accuracy report serializes with the documented schema") {
  const auto ds = synthesize_digits(4, 3);
  auto cfg = tiny_config();
  auto m = train(ds, cfg);
  m.neuron_labels = assign_neuron_labels(m, ds, cfg).labels;

  EvalOptions opts;
  opts.samples = 20;
  opts.intensity_hz = cfg.intensity_hz;
  opts.window_ms = cfg.window_ms;
  const auto report = evaluate(m, ds, opts);

  const auto j = nlohmann::json::parse(report.to_json());
  CHECK(j.at("samples").get<std::uint64_t>() == 20);
  CHECK(j.at("overall_all_activity").is_number());
  CHECK(j.at("overall_proportion").is_number());
  CHECK(j.at("no_activity_count").is_number_unsigned());
  CHECK(j.at("wall_s").is_number());
  REQUIRE(j.at("per_digit").is_array());
  REQUIRE(j.at("per_digit").size() == 10);
  for (const auto& row : j.at("per_digit")) {
    CHECK(row.contains("digit"));
    CHECK(row.contains("count"));
    if (row.at("count").get<int>() == 0) {
      CHECK(row.at("all_activity").is_null());
      CHECK(row.at("proportion").is_null());
    } else {
      CHECK(row.at("all_activity").is_number());
      CHECK(row.at("proportion").is_number());
    }
  }
}

TEST_CASE("train config validation") {
  TrainConfig cfg = tiny_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.n_exc = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgumentError);

  cfg = tiny_config();
  cfg.window_ms = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgumentError);

  cfg = tiny_config();
  cfg.intensity_hz = -3.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgumentError);

  cfg = tiny_config();
  cfg.dt_ms = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgumentError);
}
