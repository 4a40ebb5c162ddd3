#pragma once

#include <stdexcept>
#include <string>

namespace robin {

enum class ErrorKind {
  InvalidParameter,
  InfeasibleResolution,
  ParseError,
  InvariantViolation,
  NoConvergence,
  PEqualsOne,
  NonpositiveSolution,
  ProfileCrossedZero,
  TailNotConverged,
  OutsideExistenceWindow,
  NoSignChange,
  DegenerateTriangle,
  ZeroField,
  InsufficientData,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace robin
