#pragma once

#include <stdexcept>
#include <string>

namespace geoquery {

/// Malformed or inconsistent input data (files, records, rows).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or unknown configuration keys and values.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Artifacts that were built against each other no longer match
/// (checkpoint vs partition, model heads vs stack).
class CompatibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace geoquery
