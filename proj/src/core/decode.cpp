#include "core/decode.hpp"

#include <array>
#include <string>

#include "core/errors.hpp"

namespace spikebench::snn {

namespace {

void check_inputs(std::span<const double> counts, std::span<const std::int16_t> labels) {
  if (labels.empty()) throw StateError("decode: no neuron labels assigned");
  if (counts.size() != labels.size())
    throw InvalidArgumentError("decode: counts length " + std::to_string(counts.size()) +
                               " does not match labels length " + std::to_string(labels.size()));
  for (auto l : labels)
    if (l < 0 || l > 9)
      throw InvalidArgumentError("decode: neuron label " + std::to_string(l) +
                                 " outside digits 0..9");
  for (auto c : counts)
    if (c < 0.0) throw InvalidArgumentError("decode: negative spike count");
}

bool all_zero(std::span<const double> counts) {
  for (auto c : counts)
    if (c != 0.0) return false;
  return true;
}

}  // namespace

Decoded decode_all_activity(std::span<const double> counts,
                            std::span<const std::int16_t> labels) {
  check_inputs(counts, labels);
  if (all_zero(counts)) return {0, true};

  std::array<double, 10> total{};
  for (std::size_t i = 0; i < counts.size(); ++i) total[labels[i]] += counts[i];

  int best = 0;
  for (int d = 1; d < 10; ++d)
    if (total[d] > total[best]) best = d;  // strict: ties keep the lower digit
  return {best, false};
}

Decoded decode_proportion(std::span<const double> counts,
                          std::span<const std::int16_t> labels) {
  check_inputs(counts, labels);
  if (all_zero(counts)) return {0, true};

  std::array<double, 10> total{};
  std::array<std::int32_t, 10> members{};
  for (std::size_t i = 0; i < counts.size(); ++i) {
    total[labels[i]] += counts[i];
    members[labels[i]] += 1;
  }

  int best = -1;
  double best_mean = 0.0;
  for (int d = 0; d < 10; ++d) {
    if (members[d] == 0) continue;
    const double mean = total[d] / members[d];
    if (best < 0 || mean > best_mean) {
      best = d;
      best_mean = mean;
    }
  }
  return {best, false};
}

}  // namespace spikebench::snn
