#pragma once

#include <stdexcept>
#include <string>

namespace dcflex {

// Invalid configuration or out-of-range input parameters.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A window model that cannot be satisfied (forced starts exceed capacity,
// oversized forced jobs, ...).
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// Reading or writing an artifact failed.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dcflex
