#pragma once

#include <stdexcept>
#include <string>

namespace rwz {

/// File or stream could not be read/written, or its format is unsupported.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Geometric estimation failed: degenerate input, no consensus, or a
/// non-invertible transform where an invertible one is required.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration value is outside its documented domain.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace rwz
