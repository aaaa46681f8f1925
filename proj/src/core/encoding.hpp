#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace spikebench::snn {

// Binary spike raster: steps rows, width columns, 1 = spike.
struct SpikeTrain {
  std::size_t steps = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> data;

  SpikeTrain() = default;
  SpikeTrain(std::size_t n_steps, std::size_t n_units)
      : steps(n_steps), width(n_units), data(n_steps * n_units, 0) {}

  std::uint8_t at(std::size_t t, std::size_t j) const { return data[t * width + j]; }
  std::span<const std::uint8_t> step_row(std::size_t t) const {
    return {data.data() + t * width, width};
  }
  std::int64_t total_spikes() const;
};

// Rate-codes an image as independent Bernoulli draws per step: a pixel with
// value p fires at (p / 255) * intensity Hz, so each step spikes with
// probability rate * dt / 1000. Pixels must lie in [0, 255]; window_ms must
// be a whole number of steps. The same (image, seed) pair always produces
// the same train.
SpikeTrain poisson_encode(std::span<const double> image,
                          double intensity_hz,
                          double window_ms,
                          double dt_ms,
                          std::uint64_t seed);

}  // namespace spikebench::snn
