#pragma once

#include <cstdint>
#include <span>

namespace spikebench::snn {

struct Decoded {
  int digit = 0;
  // True when every spike count was zero; the digit then defaults to 0 and
  // callers should treat the prediction as a guess, not a vote.
  bool no_activity = false;
};

// Majority vote: sums spike counts per assigned digit, picks the digit with
// the largest total. Ties break toward the lower digit.
Decoded decode_all_activity(std::span<const double> counts, std::span<const std::int16_t> labels);

// Population-size-corrected vote: per-digit mean spike count instead of the
// raw sum, so digits with many assigned neurons do not win by headcount.
// Digits with no assigned neurons are skipped. Ties break toward the lower
// digit.
Decoded decode_proportion(std::span<const double> counts, std::span<const std::int16_t> labels);

}  // namespace spikebench::snn
