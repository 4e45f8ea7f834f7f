#pragma once

#include <stdexcept>
#include <string>

namespace courl {

/// Invalid parameter or configuration value, raised before any work is done.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable input or unwritable output.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A pipeline stage produced nothing to continue with (no shares, no edges).
class EmptyResultError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace courl
