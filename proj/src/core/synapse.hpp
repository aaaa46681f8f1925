#pragma once

#include <cstdint>
#include <span>

#include "core/matrix.hpp"

namespace spikebench::snn {

// Weight matrix between two populations, rows = presynaptic neurons,
// columns = postsynaptic neurons. Weights stay inside [w_min, w_max];
// stdp_update clamps after every change.
struct SynapseMatrix {
  Mat weights;
  double w_min = 0.0;
  double w_max = 1.0;
  bool plastic = false;

  SynapseMatrix() = default;
  SynapseMatrix(std::size_t pre, std::size_t post, double lo, double hi, bool is_plastic)
      : weights(pre, post), w_min(lo), w_max(hi), plastic(is_plastic) {}

  std::size_t pre_size() const { return weights.rows; }
  std::size_t post_size() const { return weights.cols; }

  void clamp();
  bool in_bounds() const;
};

// Trace-based pair STDP, applied once per simulation step after both
// populations have been stepped (so the traces already include this step's
// decay and any new spikes).
//
//   presynaptic spike at row i:   w(i, j) -= eta_pre  * post_trace[j]
//   postsynaptic spike at col j:  w(i, j) += eta_post * pre_trace[i]
//
// Depression is applied before potentiation; every touched weight is clamped
// back into [w_min, w_max] at the end.
void stdp_update(SynapseMatrix& syn,
                 std::span<const std::uint8_t> pre_spiked,
                 std::span<const std::uint8_t> post_spiked,
                 std::span<const double> pre_trace,
                 std::span<const double> post_trace,
                 double eta_pre,
                 double eta_post);

}  // namespace spikebench::snn
