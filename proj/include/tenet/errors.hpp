#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tenet {

/// Malformed input data. `line` is 1-based, 0 when not tied to a line.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite cost or parameter.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A metric has no defined value for the given inputs (e.g. MRE with all-zero targets).
class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A dataset was rejected as a whole (e.g. too few usable days).
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tenet
