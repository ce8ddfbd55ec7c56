#pragma once

#include <stdexcept>
#include <string>

namespace cfpower {

// Invalid caller-supplied arguments: dimension mismatches, out-of-range
// parameters, malformed configs.
class argument_error : public std::invalid_argument {
public:
  explicit argument_error(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failure inside an iterative solver. Carries the last bracket so
// callers can report how far the search got.
class solver_error : public std::runtime_error {
public:
  solver_error(const std::string& what, double lo, double hi, int iters)
      : std::runtime_error(what), bracket_lo(lo), bracket_hi(hi), iterations(iters) {}

  double bracket_lo;
  double bracket_hi;
  int iterations;
};

// Problem size exceeds a hard enumeration guard.
class capacity_error : public std::runtime_error {
public:
  explicit capacity_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cfpower
