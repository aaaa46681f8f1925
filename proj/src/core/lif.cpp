#include "core/lif.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace spikebench::snn {

void LifParams::validate() const {
  if (!(dt_ms > 0.0)) throw InvalidArgumentError("LifParams: dt_ms must be > 0");
  if (!(tau_rc_ms > 0.0)) throw InvalidArgumentError("LifParams: tau_rc_ms must be > 0");
  if (!(tau_refrac_ms >= 0.0)) throw InvalidArgumentError("LifParams: tau_refrac_ms must be >= 0");
  if (!(tau_trace_ms > 0.0)) throw InvalidArgumentError("LifParams: tau_trace_ms must be > 0");
  if (!(tau_theta_ms > 0.0)) throw InvalidArgumentError("LifParams: tau_theta_ms must be > 0");
  if (!(resistance > 0.0)) throw InvalidArgumentError("LifParams: resistance must be > 0");
  // The threshold has to sit above both rest and reset or the neuron either
  // never fires or fires forever. Reset above rest is legal: the inhibitory
  // population uses that to re-arm quickly after a spike.
  if (!(v_rest_mv < v_thresh_base_mv))
    throw InvalidArgumentError("LifParams: v_rest_mv must be below v_thresh_base_mv");
  if (!(v_reset_mv < v_thresh_base_mv))
    throw InvalidArgumentError("LifParams: v_reset_mv must be below v_thresh_base_mv");
  if (!(theta_plus_mv >= 0.0)) throw InvalidArgumentError("LifParams: theta_plus_mv must be >= 0");
}

LifParams excitatory_defaults(double dt_ms) {
  LifParams p;
  p.tau_rc_ms = 100.0;
  p.resistance = 1.0;
  p.v_rest_mv = -65.0;
  p.v_reset_mv = -60.0;
  p.v_thresh_base_mv = -52.0;
  p.tau_refrac_ms = 5.0;
  p.dt_ms = dt_ms;
  p.tau_trace_ms = 20.0;
  p.theta_plus_mv = 0.05;
  p.tau_theta_ms = 1.0e7;
  return p;
}

LifParams inhibitory_defaults(double dt_ms) {
  LifParams p;
  p.tau_rc_ms = 10.0;
  p.resistance = 1.0;
  p.v_rest_mv = -60.0;
  p.v_reset_mv = -45.0;
  p.v_thresh_base_mv = -40.0;
  p.tau_refrac_ms = 2.0;
  p.dt_ms = dt_ms;
  p.tau_trace_ms = 20.0;
  p.theta_plus_mv = 0.0;  // inhibitory thresholds never adapt
  p.tau_theta_ms = 1.0e7;
  return p;
}

void NeuronState::reset_transient(double v_rest) {
  for (auto& x : v) x = v_rest;
  for (auto& x : refrac_remaining_ms) x = 0.0;
  for (auto& x : trace) x = 0.0;
}

std::vector<std::uint8_t> lif_step(NeuronState& state,
                                   std::span<const double> input_current,
                                   const LifParams& p,
                                   bool adaptive) {
  const std::size_t n = state.size();
  if (input_current.size() != n)
    throw InvalidArgumentError("lif_step: current vector has length " +
                               std::to_string(input_current.size()) + ", state has " +
                               std::to_string(n) + " neurons");

  const double decay = std::exp(-p.dt_ms / p.tau_rc_ms);
  const double charge = 1.0 - decay;
  const double trace_decay = std::exp(-p.dt_ms / p.tau_trace_ms);
  const double theta_decay = std::exp(-p.dt_ms / p.tau_theta_ms);

  std::vector<std::uint8_t> spiked(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    state.trace[i] *= trace_decay;
    if (adaptive) state.theta[i] *= theta_decay;

    if (state.refrac_remaining_ms[i] > 0.0) {
      state.refrac_remaining_ms[i] = std::max(0.0, state.refrac_remaining_ms[i] - p.dt_ms);
      state.v[i] = p.v_reset_mv;
      continue;
    }

    state.v[i] = p.v_rest_mv + (state.v[i] - p.v_rest_mv) * decay +
                 p.resistance * input_current[i] * charge;

    if (state.v[i] >= p.v_thresh_base_mv + state.theta[i]) {
      spiked[i] = 1;
      state.v[i] = p.v_reset_mv;
      state.refrac_remaining_ms[i] = p.tau_refrac_ms;
      if (adaptive) state.theta[i] += p.theta_plus_mv;
      state.trace[i] = 1.0;
    }
  }
  return spiked;
}

}  // namespace spikebench::snn
