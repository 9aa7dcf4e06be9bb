#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace steklov {

enum class ErrorKind {
  InvalidArgument,
  ConfigError,
  MalformedMesh,
  AssumptionViolation,
  SolverFailure,
  ShiftAtEigenvalue,
  InsufficientData,
  DegenerateCluster,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::ConfigError: return "config-error";
    case ErrorKind::MalformedMesh: return "malformed-mesh";
    case ErrorKind::AssumptionViolation: return "assumption-violation";
    case ErrorKind::SolverFailure: return "solver-failure";
    case ErrorKind::ShiftAtEigenvalue: return "shift-at-eigenvalue";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::DegenerateCluster: return "degenerate-cluster";
  }
  return "unknown";
}

/// Exception carrying a machine-readable category next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace steklov
