#include "core/synapse.hpp"

#include <algorithm>
#include <string>

#include "core/errors.hpp"

namespace spikebench::snn {

void SynapseMatrix::clamp() {
  for (auto& w : weights.v) w = std::clamp(w, w_min, w_max);
}

bool SynapseMatrix::in_bounds() const {
  for (const auto& w : weights.v)
    if (w < w_min || w > w_max) return false;
  return true;
}

void stdp_update(SynapseMatrix& syn,
                 std::span<const std::uint8_t> pre_spiked,
                 std::span<const std::uint8_t> post_spiked,
                 std::span<const double> pre_trace,
                 std::span<const double> post_trace,
                 double eta_pre,
                 double eta_post) {
  if (!syn.plastic) throw StateError("stdp_update: synapse matrix is not plastic");
  const std::size_t npre = syn.pre_size();
  const std::size_t npost = syn.post_size();
  if (pre_spiked.size() != npre || pre_trace.size() != npre)
    throw InvalidArgumentError("stdp_update: presynaptic spans must have length " +
                               std::to_string(npre));
  if (post_spiked.size() != npost || post_trace.size() != npost)
    throw InvalidArgumentError("stdp_update: postsynaptic spans must have length " +
                               std::to_string(npost));

  // Depression: presynaptic spikes pull their outgoing row down in proportion
  // to how recently each postsynaptic neuron fired.
  for (std::size_t i = 0; i < npre; ++i) {
    if (!pre_spiked[i]) continue;
    double* row = syn.weights.row(i);
    for (std::size_t j = 0; j < npost; ++j) row[j] -= eta_pre * post_trace[j];
  }

  // Potentiation: postsynaptic spikes pull their incoming column up in
  // proportion to how recently each presynaptic neuron fired.
  for (std::size_t j = 0; j < npost; ++j) {
    if (!post_spiked[j]) continue;
    for (std::size_t i = 0; i < npre; ++i)
      syn.weights.at(i, j) += eta_post * pre_trace[i];
  }

  // Cheap compared to the updates above; touched rows/columns are sparse but
  // clamping everything keeps the bounds invariant unconditional.
  for (std::size_t i = 0; i < npre; ++i) {
    if (!pre_spiked[i]) continue;
    double* row = syn.weights.row(i);
    for (std::size_t j = 0; j < npost; ++j) row[j] = std::clamp(row[j], syn.w_min, syn.w_max);
  }
  for (std::size_t j = 0; j < npost; ++j) {
    if (!post_spiked[j]) continue;
    for (std::size_t i = 0; i < npre; ++i) {
      double& w = syn.weights.at(i, j);
      w = std::clamp(w, syn.w_min, syn.w_max);
    }
  }
}

}  // namespace spikebench::snn
