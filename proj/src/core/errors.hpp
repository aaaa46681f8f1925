#pragma once

#include <stdexcept>

namespace spikebench {

// Error taxonomy shared across the library. The C facade in capi.cpp maps
// each type onto a stable status code, so keep this list in sync with the
// sb_status enum in include/spikebench.h.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgumentError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
// File layout is not what we expect (bad magic, wrong dimensionality).
struct FormatError : Error { using Error::Error; };
// File parsed fine but the values inside are unusable (label 17, truncation).
struct DataError : Error { using Error::Error; };
// Stored checksum does not match the payload.
struct CorruptError : Error { using Error::Error; };
struct VersionError : Error { using Error::Error; };
// Operation requires state the object does not have (e.g. labels not assigned).
struct StateError : Error { using Error::Error; };
// Benchmark or service could not even start (target unreachable, bind failed).
struct SetupError : Error { using Error::Error; };
// Statistic undefined for the given input (percentile of an empty list).
struct StatError : Error { using Error::Error; };

}  // namespace spikebench
