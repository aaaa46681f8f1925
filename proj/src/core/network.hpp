#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "core/encoding.hpp"
#include "core/lif.hpp"
#include "core/synapse.hpp"

namespace spikebench::snn {

// Lateral inhibition ramps up during training so early samples can recruit
// neurons before competition hardens. magnitude_at(n) gives the absolute
// strength after n samples; the stored inh->exc weights are its negative.
struct InhibitionSchedule {
  double initial_magnitude = 10.0;
  double max_magnitude = 40.0;
  std::uint32_t update_interval = 500;
  double increment_per_update = 0.25;

  double magnitude_at(std::uint64_t samples_processed) const;
};

struct StdpRates {
  double eta_pre = 1e-4;
  double eta_post = 1e-2;
};

inline constexpr int kNoPrediction = -1;

// Everything observed while presenting one spike train to the network.
struct InferenceRecord {
  std::vector<std::int32_t> exc_spike_counts;
  std::int64_t total_output_spikes = 0;
  int pred_all_activity = kNoPrediction;
  int pred_proportion = kNoPrediction;
  double sim_wall_ms = 0.0;

  bool no_activity() const { return total_output_spikes == 0; }
};

// Three-layer spiking classifier: input (Poisson pixels) -> excitatory layer
// with plastic synapses -> one-to-one inhibitory layer wired back to every
// other excitatory neuron. All mutable simulation state lives here, so one
// model instance is one independent network.
struct NetworkModel {
  std::uint32_t input_size = 784;
  std::uint32_t n_exc = 400;

  SynapseMatrix syn_input_exc;  // input_size x n_exc, plastic, [0, 1]
  SynapseMatrix syn_exc_inh;    // n_exc x n_exc diagonal, fixed
  SynapseMatrix syn_inh_exc;    // n_exc x n_exc, zero diagonal, fixed, <= 0

  NeuronState exc_state;
  NeuronState inh_state;
  LifParams exc_params;
  LifParams inh_params;

  std::vector<std::int16_t> neuron_labels;  // empty until assigned, else 0..9
  InhibitionSchedule inhibition;
  StdpRates stdp;
  double exc_inh_weight = 22.5;
  double normalize_target = 78.4;

  bool labels_assigned() const { return !neuron_labels.empty(); }
  void validate() const;

  // Fresh untrained network: input weights U(0, 0.3) from the seed, then
  // column-normalized; inhibition set for zero samples processed.
  static NetworkModel make(std::uint32_t n_exc,
                           std::uint64_t seed,
                           std::uint32_t input_size = 784,
                           double dt_ms = 1.0);
};

using StepObserver =
    std::function<void(std::size_t step, std::span<const std::uint8_t> exc_spiked)>;

// Presents one spike train. Transient state (voltages, refractory clocks,
// traces) is reset first; adaptive thresholds and weights persist. With
// learning = true the thresholds adapt and STDP runs every step; with
// learning = false the weights and thetas are read-only, so inference does
// not perturb the model.
InferenceRecord run_network(NetworkModel& m,
                            const SpikeTrain& input,
                            bool learning,
                            const StepObserver& observer = {});

// Rescales every syn_input_exc column to sum to target_sum (columns that sum
// to zero are left alone). Pure scaling: relative weight structure within a
// column is preserved exactly.
void normalize_input_weights(NetworkModel& m, double target_sum);

// Sets every off-diagonal inh->exc weight to -schedule.magnitude_at(n).
void update_inhibition(NetworkModel& m, std::uint64_t samples_processed);

}  // namespace spikebench::snn
