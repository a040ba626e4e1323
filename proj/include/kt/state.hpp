#pragma once

#include <cstddef>
#include <vector>

#include "kt/linalg.hpp"

namespace kt {

/// Errors of one iterate against x*, x† and x† + P_{N(A)}x0.
struct ErrorRecord {
  std::size_t k = 0;
  double err_xstar = 0.0;
  double err_xdagger = 0.0;
  double err_shifted = 0.0;

  bool operator==(const ErrorRecord&) const = default;
};

struct IterationState {
  Vector x;
  std::size_t k = 0;
  std::vector<ErrorRecord> history;

  static IterationState start(Vector x0) { return IterationState{std::move(x0), 0, {}}; }
};

}  // namespace kt
