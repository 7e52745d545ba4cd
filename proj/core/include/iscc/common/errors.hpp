#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iscc {

/// Thrown when an argument violates a documented precondition.
class InvalidInput : public std::invalid_argument {
public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when a signal does not carry enough structure for the requested
/// model order (e.g. fewer distinct modes than poles asked for).
class DegenerateSignal : public std::runtime_error {
public:
  DegenerateSignal(const std::string& what, std::size_t achieved_rank)
      : std::runtime_error(what), achieved_rank_(achieved_rank) {}

  std::size_t achieved_rank() const noexcept { return achieved_rank_; }

private:
  std::size_t achieved_rank_;
};

/// Thrown when a problem instance is structurally unsolvable regardless of
/// the data (e.g. more unknowns than observed equations).
class UnidentifiableConfiguration : public std::runtime_error {
public:
  explicit UnidentifiableConfiguration(const std::string& what)
      : std::runtime_error(what) {}
};

/// Thrown when a filter update cannot be applied because the innovation
/// covariance is numerically singular.
class DegenerateUpdate : public std::runtime_error {
public:
  explicit DegenerateUpdate(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace iscc
