#pragma once

#include <cstdint>

#include "core/mnist.hpp"

namespace spikebench::data {

// Procedurally drawn 28x28 digit corpus for environments without the real
// handwritten set. Each sample renders a fixed per-digit stroke skeleton
// with randomized rotation, scale, shift, stroke width, brightness and
// speckle noise, so the classes overlap enough to be a meaningful
// classification problem while staying fully deterministic in the seed.
//
// Samples are interleaved by class (sample i has digit i % 10), so any
// prefix of the corpus is balanced.
Dataset synthesize_digits(std::size_t per_class, std::uint64_t seed);

}  // namespace spikebench::data
