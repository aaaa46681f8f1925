#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace spikebench::snn {

// Leaky integrate-and-fire constants. Voltages are in mV, times in ms.
// The membrane follows tau_rc * dv/dt = -(v - v_rest) + R*I; callers hand
// lif_step a current that is already scaled into voltage units (see the
// drive-to-current conversion in network.cpp).
struct LifParams {
  double tau_rc_ms = 100.0;
  double resistance = 1.0;
  double v_rest_mv = -65.0;
  double v_reset_mv = -60.0;
  double v_thresh_base_mv = -52.0;
  double tau_refrac_ms = 5.0;
  double dt_ms = 1.0;
  double tau_trace_ms = 20.0;
  // Threshold homeostasis, applied only when stepping with adaptive = true.
  double theta_plus_mv = 0.05;
  double tau_theta_ms = 1.0e7;

  // Throws InvalidArgumentError when the constants cannot describe a working
  // neuron (non-positive time constants, threshold at or below reset/rest).
  void validate() const;
};

// Excitatory population constants.
LifParams excitatory_defaults(double dt_ms = 1.0);
// Inhibitory population constants. Note v_reset (-45) sits above v_rest (-60)
// by design: after a spike the neuron restarts close to threshold.
LifParams inhibitory_defaults(double dt_ms = 1.0);

// Per-neuron dynamic variables, stored struct-of-arrays.
struct NeuronState {
  std::vector<double> v;
  std::vector<double> theta;
  std::vector<double> refrac_remaining_ms;
  std::vector<double> trace;

  NeuronState() = default;
  NeuronState(std::size_t n, double v_rest)
      : v(n, v_rest), theta(n, 0.0), refrac_remaining_ms(n, 0.0), trace(n, 0.0) {}

  std::size_t size() const { return v.size(); }

  // Clears everything that belongs to a single presentation window. The
  // adaptive thresholds survive: they are learned state, not transient state.
  void reset_transient(double v_rest);
};

// Advances every neuron by one step of length p.dt_ms using the exact
// exponential update, and returns a 0/1 flag per neuron that fired.
//
// Order within the step: traces decay (and thetas, when adaptive), refractory
// neurons sit at v_reset and count down, everyone else integrates, then
// threshold crossings fire, reset, and pin their trace to 1.
std::vector<std::uint8_t> lif_step(NeuronState& state,
                                   std::span<const double> input_current,
                                   const LifParams& p,
                                   bool adaptive);

}  // namespace spikebench::snn
