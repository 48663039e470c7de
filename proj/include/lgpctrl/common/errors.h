#pragma once

#include <stdexcept>
#include <string>

namespace lgpctrl {

/// Invalid arguments: non-finite entries, mismatched dimensions, bad ranges.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A matrix factorization failed even after the permitted jitter.
class DecompositionError : public std::runtime_error {
 public:
  DecompositionError(const std::string& what, int pivot)
      : std::runtime_error(what), pivot_(pivot) {}
  int pivot() const { return pivot_; }

 private:
  int pivot_{-1};
};

/// Certificate parameters violate a stated condition.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unknown configuration content.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be read or written; the message names the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lgpctrl
