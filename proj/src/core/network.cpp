#include "core/network.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "core/decode.hpp"
#include "core/errors.hpp"
#include "core/rng.hpp"

namespace spikebench::snn {

double InhibitionSchedule::magnitude_at(std::uint64_t samples_processed) const {
  const double steps = update_interval == 0
                           ? 0.0
                           : static_cast<double>(samples_processed / update_interval);
  return std::min(max_magnitude, initial_magnitude + increment_per_update * steps);
}

void NetworkModel::validate() const {
  exc_params.validate();
  inh_params.validate();
  if (n_exc == 0) throw InvalidArgumentError("NetworkModel: n_exc must be > 0");
  if (input_size == 0) throw InvalidArgumentError("NetworkModel: input_size must be > 0");

  auto expect_shape = [](const SynapseMatrix& s, std::size_t pre, std::size_t post,
                         const char* name) {
    if (s.pre_size() != pre || s.post_size() != post)
      throw InvalidArgumentError(std::string("NetworkModel: ") + name + " has wrong shape");
  };
  expect_shape(syn_input_exc, input_size, n_exc, "syn_input_exc");
  expect_shape(syn_exc_inh, n_exc, n_exc, "syn_exc_inh");
  expect_shape(syn_inh_exc, n_exc, n_exc, "syn_inh_exc");

  if (exc_state.size() != n_exc || inh_state.size() != n_exc)
    throw InvalidArgumentError("NetworkModel: neuron state size does not match n_exc");

  for (std::size_t i = 0; i < n_exc; ++i) {
    for (std::size_t j = 0; j < n_exc; ++j) {
      const double w = syn_inh_exc.weights.at(i, j);
      if (i == j) {
        if (w != 0.0)
          throw InvalidArgumentError("NetworkModel: syn_inh_exc diagonal must be zero");
      } else if (w > 0.0) {
        throw InvalidArgumentError("NetworkModel: syn_inh_exc off-diagonal must be <= 0");
      }
    }
  }

  // The plastic input matrix is clamped into [w_min, w_max] by every STDP
  // update, but the column renormalization after each sample is a pure
  // scaling and may leave individual weights slightly above w_max until the
  // next update touches them. Only the lower bound and finiteness are hard
  // invariants there; the fixed matrices must honor their ranges exactly.
  for (double w : syn_input_exc.weights.v)
    if (!std::isfinite(w) || w < syn_input_exc.w_min)
      throw InvalidArgumentError("NetworkModel: input weights must be finite and >= w_min");
  if (!syn_exc_inh.in_bounds() || !syn_inh_exc.in_bounds())
    throw InvalidArgumentError("NetworkModel: synapse weights out of bounds");

  if (!neuron_labels.empty()) {
    if (neuron_labels.size() != n_exc)
      throw InvalidArgumentError("NetworkModel: label vector size does not match n_exc");
    for (auto l : neuron_labels)
      if (l < 0 || l > 9)
        throw InvalidArgumentError("NetworkModel: neuron labels must be digits 0..9");
  }
}

NetworkModel NetworkModel::make(std::uint32_t n_exc,
                                std::uint64_t seed,
                                std::uint32_t input_size,
                                double dt_ms) {
  if (n_exc == 0) throw InvalidArgumentError("NetworkModel::make: n_exc must be > 0");
  if (input_size == 0) throw InvalidArgumentError("NetworkModel::make: input_size must be > 0");

  NetworkModel m;
  m.input_size = input_size;
  m.n_exc = n_exc;
  m.exc_params = excitatory_defaults(dt_ms);
  m.inh_params = inhibitory_defaults(dt_ms);

  m.syn_input_exc = SynapseMatrix(input_size, n_exc, 0.0, 1.0, true);
  Rng rng(seed);
  for (auto& w : m.syn_input_exc.weights.v) w = 0.3 * uniform01(rng);

  m.syn_exc_inh = SynapseMatrix(n_exc, n_exc, 0.0, m.exc_inh_weight, false);
  for (std::size_t i = 0; i < n_exc; ++i) m.syn_exc_inh.weights.at(i, i) = m.exc_inh_weight;

  m.syn_inh_exc = SynapseMatrix(n_exc, n_exc, -m.inhibition.max_magnitude, 0.0, false);

  m.exc_state = NeuronState(n_exc, m.exc_params.v_rest_mv);
  m.inh_state = NeuronState(n_exc, m.inh_params.v_rest_mv);

  // The canonical target of 78.4 assumes 784 input pixels, i.e. an average
  // weight of 0.1 per input. Scale it with the input size so reduced-scale
  // networks keep the same per-input density instead of blowing every
  // weight past w_max.
  if (input_size != 784) m.normalize_target = 0.1 * static_cast<double>(input_size);
  normalize_input_weights(m, m.normalize_target);
  update_inhibition(m, 0);
  m.validate();
  return m;
}

void normalize_input_weights(NetworkModel& m, double target_sum) {
  if (!(target_sum > 0.0))
    throw InvalidArgumentError("normalize_input_weights: target_sum must be > 0");
  Mat& w = m.syn_input_exc.weights;
  for (std::size_t j = 0; j < w.cols; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < w.rows; ++i) sum += w.at(i, j);
    if (sum <= 0.0) continue;
    const double scale = target_sum / sum;
    for (std::size_t i = 0; i < w.rows; ++i) w.at(i, j) *= scale;
  }
}

void update_inhibition(NetworkModel& m, std::uint64_t samples_processed) {
  const double mag = m.inhibition.magnitude_at(samples_processed);
  Mat& w = m.syn_inh_exc.weights;
  for (std::size_t i = 0; i < w.rows; ++i)
    for (std::size_t j = 0; j < w.cols; ++j) w.at(i, j) = (i == j) ? 0.0 : -mag;
}

namespace {

// out[j] += sum over spiking presynaptic i of W(i, j). Iterating only the
// rows that actually spiked keeps the cost proportional to activity.
void accumulate_spike_drive(const Mat& w,
                            std::span<const std::uint8_t> spiked,
                            std::span<double> out) {
  for (std::size_t i = 0; i < spiked.size(); ++i) {
    if (!spiked[i]) continue;
    const double* row = w.row(i);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += row[j];
  }
}

}  // namespace

InferenceRecord run_network(NetworkModel& m,
                            const SpikeTrain& input,
                            bool learning,
                            const StepObserver& observer) {
  if (input.width != m.input_size)
    throw InvalidArgumentError("run_network: spike train width " + std::to_string(input.width) +
                               " does not match input_size " + std::to_string(m.input_size));
  if (learning && !m.syn_input_exc.plastic)
    throw StateError("run_network: learning requested but input synapses are not plastic");

  const auto t0 = std::chrono::steady_clock::now();

  m.exc_state.reset_transient(m.exc_params.v_rest_mv);
  m.inh_state.reset_transient(m.inh_params.v_rest_mv);

  // Synaptic events are modeled as delta kicks: one presynaptic spike with
  // weight w should move the target membrane by w * R mV. The exact
  // integrator multiplies current by (1 - exp(-dt/tau)), so the summed
  // weights are divided by that factor once here.
  const double exc_gain = 1.0 / (1.0 - std::exp(-m.exc_params.dt_ms / m.exc_params.tau_rc_ms));
  const double inh_gain = 1.0 / (1.0 - std::exp(-m.inh_params.dt_ms / m.inh_params.tau_rc_ms));
  const double input_trace_decay = std::exp(-m.exc_params.dt_ms / m.exc_params.tau_trace_ms);

  const std::size_t n = m.n_exc;
  std::vector<double> exc_current(n);
  std::vector<double> inh_current(n);
  std::vector<double> input_trace(m.input_size, 0.0);
  std::vector<std::uint8_t> inh_prev(n, 0);
  InferenceRecord rec;
  rec.exc_spike_counts.assign(n, 0);

  for (std::size_t t = 0; t < input.steps; ++t) {
    const auto input_spikes = input.step_row(t);

    std::fill(exc_current.begin(), exc_current.end(), 0.0);
    accumulate_spike_drive(m.syn_input_exc.weights, input_spikes, exc_current);
    // Inhibition from last step's inhibitory spikes (one-step loop delay).
    accumulate_spike_drive(m.syn_inh_exc.weights, inh_prev, exc_current);
    for (auto& c : exc_current) c *= exc_gain;
    const auto exc_spiked = lif_step(m.exc_state, exc_current, m.exc_params, learning);

    std::fill(inh_current.begin(), inh_current.end(), 0.0);
    accumulate_spike_drive(m.syn_exc_inh.weights, exc_spiked, inh_current);
    for (auto& c : inh_current) c *= inh_gain;
    const auto inh_spiked = lif_step(m.inh_state, inh_current, m.inh_params, false);

    if (learning) {
      for (std::size_t j = 0; j < input_trace.size(); ++j) {
        input_trace[j] *= input_trace_decay;
        if (input_spikes[j]) input_trace[j] = 1.0;
      }
      stdp_update(m.syn_input_exc, input_spikes, exc_spiked, input_trace, m.exc_state.trace,
                  m.stdp.eta_pre, m.stdp.eta_post);
    }

    for (std::size_t i = 0; i < n; ++i) rec.exc_spike_counts[i] += exc_spiked[i];
    if (observer) observer(t, exc_spiked);
    inh_prev = inh_spiked;
  }

  rec.total_output_spikes = 0;
  for (auto c : rec.exc_spike_counts) rec.total_output_spikes += c;

  if (m.labels_assigned()) {
    std::vector<double> counts(rec.exc_spike_counts.begin(), rec.exc_spike_counts.end());
    rec.pred_all_activity = decode_all_activity(counts, m.neuron_labels).digit;
    rec.pred_proportion = decode_proportion(counts, m.neuron_labels).digit;
  }

  rec.sim_wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace spikebench::snn
