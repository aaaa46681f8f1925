#include "core/encoding.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace spikebench::snn {

std::int64_t SpikeTrain::total_spikes() const {
  return std::accumulate(data.begin(), data.end(), std::int64_t{0});
}

SpikeTrain poisson_encode(std::span<const double> image,
                          double intensity_hz,
                          double window_ms,
                          double dt_ms,
                          std::uint64_t seed) {
  if (image.empty()) throw InvalidArgumentError("poisson_encode: empty image");
  if (!(intensity_hz > 0.0)) throw InvalidArgumentError("poisson_encode: intensity must be > 0");
  if (!(dt_ms > 0.0)) throw InvalidArgumentError("poisson_encode: dt_ms must be > 0");
  if (!(window_ms > 0.0)) throw InvalidArgumentError("poisson_encode: window_ms must be > 0");

  const double steps_f = window_ms / dt_ms;
  const auto steps = static_cast<std::size_t>(std::llround(steps_f));
  if (steps == 0 || std::abs(steps_f - static_cast<double>(steps)) > 1e-9 * steps_f)
    throw InvalidArgumentError("poisson_encode: window_ms must be a whole number of dt_ms steps");

  // Per-step spike probability for each pixel. Only pixels with nonzero
  // probability consume random draws; zero pixels can never spike, so
  // skipping them changes nothing observable and saves most of the work on
  // sparse images.
  std::vector<std::size_t> active;
  std::vector<double> prob;
  active.reserve(image.size());
  prob.reserve(image.size());
  for (std::size_t j = 0; j < image.size(); ++j) {
    const double px = image[j];
    if (px < 0.0 || px > 255.0)
      throw InvalidArgumentError("poisson_encode: pixel " + std::to_string(j) +
                                 " out of range [0, 255]");
    if (px == 0.0) continue;
    const double rate_hz = (px / 255.0) * intensity_hz;
    double p = rate_hz * dt_ms / 1000.0;
    if (p > 1.0) p = 1.0;
    active.push_back(j);
    prob.push_back(p);
  }

  SpikeTrain train(steps, image.size());
  Rng rng(seed);
  for (std::size_t t = 0; t < steps; ++t) {
    std::uint8_t* row = train.data.data() + t * train.width;
    for (std::size_t k = 0; k < active.size(); ++k)
      if (uniform01(rng) < prob[k]) row[active[k]] = 1;
  }
  return train;
}

}  // namespace spikebench::snn
