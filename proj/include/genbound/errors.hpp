#pragma once

#include <stdexcept>
#include <string>

namespace genbound {

/// Operands defined over alphabets of different sizes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An exhaustive oracle or enumeration was asked to exceed its size cap.
class CapExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// A constrained program has an empty feasible set.
class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration text could not be turned into a valid experiment.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message, long line = -1)
      : std::runtime_error(format(field, message, line)), field_(field), line_(line) {}

  const std::string& field() const { return field_; }
  long line() const { return line_; }

 private:
  static std::string format(const std::string& field, const std::string& message, long line) {
    std::string out = "config error";
    if (line >= 0) out += " (line " + std::to_string(line) + ")";
    if (!field.empty()) out += " [" + field + "]";
    return out + ": " + message;
  }

  std::string field_;
  long line_;
};

}  // namespace genbound
