#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace interlace {

/// Malformed graph spec or vertex encoding.
class EncodingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Bad argument outside of encodings (ranges, ordering, preconditions).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation needs a transient graph.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A finite structure would exceed the memory budget.
class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& what, std::size_t required)
      : std::runtime_error(what + " (estimated size " + std::to_string(required) + ")"),
        required_(required) {}
  std::size_t required() const { return required_; }

 private:
  std::size_t required_;
};

/// Iterative solve did not reach its tolerance; carries the last bracket.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_value, double last_gap)
      : std::runtime_error(what), last_value_(last_value), last_gap_(last_gap) {}
  double last_value() const { return last_value_; }
  double last_gap() const { return last_gap_; }

 private:
  double last_value_;
  double last_gap_;
};

/// Sampler cannot proceed at a useful rate (e.g. rejection acceptance collapse).
class FeasibilityError : public std::runtime_error {
 public:
  FeasibilityError(const std::string& what, double rate)
      : std::runtime_error(what + " (measured rate " + std::to_string(rate) + ")"), rate_(rate) {}
  double rate() const { return rate_; }

 private:
  double rate_;
};

}  // namespace interlace
