#pragma once

#include <stdexcept>
#include <string>

namespace dpwilcox {

// Invalid user data (non-finite values, malformed CSV rows, empty input).
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Out-of-range configuration (epsilon <= 0, alpha outside (0,1), gamma >= alpha, ...).
class ParameterError : public std::runtime_error {
 public:
  explicit ParameterError(const std::string& what) : std::runtime_error(what) {}
};

// Requests exceeding configured resource caps (reference draw count).
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dpwilcox
