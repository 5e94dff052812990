#pragma once

#include <stdexcept>
#include <string>

namespace tmq {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Evaluation outside a declared validity window or an invalid physical input.
struct DomainError : Error {
  using Error::Error;
};

// Kernel or decomposition carries no weight (e.g. pumps disjoint from the grid).
struct DegenerateKernelError : Error {
  using Error::Error;
};

// Grid too coarse for the requested spectral feature.
struct ResolutionError : Error {
  using Error::Error;
};

struct BracketError : Error {
  using Error::Error;
};

struct ConvergenceError : Error {
  ConvergenceError(const std::string& what, double best, int iterations)
      : Error(what), best_iterate(best), iterations(iterations) {}
  double best_iterate;
  int iterations;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace tmq
