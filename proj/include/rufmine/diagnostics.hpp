#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rufmine {

// Base for all library errors. Subtypes exist so callers can distinguish
// bad inputs from numeric blowups without parsing messages.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Collector for non-fatal conditions (inconsistent object pairs, clamped
// weights, cap hits). Operations that can warn accept a nullable pointer;
// passing nullptr drops the messages.
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string msg) { warnings.push_back(std::move(msg)); }
  bool empty() const { return warnings.empty(); }

  bool contains(const std::string& needle) const {
    for (const auto& w : warnings)
      if (w.find(needle) != std::string::npos) return true;
    return false;
  }
};

inline void warn_into(Diagnostics* diag, std::string msg) {
  if (diag) diag->warn(std::move(msg));
}

}  // namespace rufmine
