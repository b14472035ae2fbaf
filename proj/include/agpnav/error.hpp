#pragma once

#include <stdexcept>
#include <string>

namespace agpnav {

enum class ErrorKind {
  InvalidArgument,
  GenerationFailed,
  ParseError,
  TangentInfeasible,
  EndpointInZone,
  PlanFailed,
  InvalidCommand,
  ModelFormat,
  NavigationFailed,
  TrainingDiverged,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` distinguishes failures.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace agpnav
