#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "core/network.hpp"

namespace spikebench::modelio {

// A trained network plus the encoding settings inference needs and enough
// provenance to reproduce the run.
struct ModelArtifact {
  snn::NetworkModel model;
  double window_ms = 100.0;
  double intensity_hz = 64.0;
  std::uint64_t train_seed = 0;
  std::uint64_t trained_samples = 0;
  // Hex FNV-1a of the serialized payload; filled in by save/load.
  std::string version;

  // Rough in-memory footprint (weight matrices plus per-neuron state).
  std::size_t resident_bytes() const;
};

// Binary little-endian format, version 1, with a trailing FNV-1a 64 checksum
// over everything before it. Loading verifies the checksum (CorruptError on
// mismatch) and the format version (VersionError on anything newer).
void save_model(ModelArtifact& artifact, const std::string& path);
ModelArtifact load_model(const std::string& path);

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

}  // namespace spikebench::modelio
