#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace qmcslice {

enum class ErrorKind {
  Parameter,     // invalid argument values or inconsistent configuration
  Domain,        // argument outside the mathematical domain
  Parse,         // malformed input text
  Io,            // file could not be opened or written
  Capability,    // unsupported family/backend/dimension combination
  Numerical,     // evaluation did not reach its tolerance
  Degenerate,    // degenerate data (e.g. all distances zero)
  PlanMismatch,  // data does not match a precomputed plan
  Diverged,      // optimizer produced non-finite values
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, double residual = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(what), kind_(kind), residual_(residual) {}

  ErrorKind kind() const noexcept { return kind_; }
  // Residual estimate for numerical failures, NaN otherwise.
  double residual() const noexcept { return residual_; }

 private:
  ErrorKind kind_;
  double residual_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace qmcslice
