#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace graflow {

inline constexpr const char* kVersion = "0.1.0";

/// Thrown when a text input (expression, config) fails to parse.
/// Carries a 1-based line/column pointing at the offending character.
struct ParseError : std::runtime_error {
  ParseError(std::string msg, int line_, int column_)
      : std::runtime_error(std::move(msg)), line(line_), column(column_) {}
  int line = 1;
  int column = 1;
};

/// Thrown when a flow run cannot continue (CFL violation, linear solver
/// breakdown, ...). Distinct from std::invalid_argument so the CLI can map
/// it to its own exit code.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool is_finite(double x) { return std::isfinite(x); }

// FNV-1a, used for config fingerprints. Not cryptographic.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace graflow
