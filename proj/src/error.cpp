#include "robin/error.hpp"

namespace robin {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::InfeasibleResolution: return "infeasible-resolution";
    case ErrorKind::ParseError: return "parse-error";
    case ErrorKind::InvariantViolation: return "invariant-violation";
    case ErrorKind::NoConvergence: return "no-convergence";
    case ErrorKind::PEqualsOne: return "p-equals-one";
    case ErrorKind::NonpositiveSolution: return "nonpositive-solution";
    case ErrorKind::ProfileCrossedZero: return "profile-crossed-zero";
    case ErrorKind::TailNotConverged: return "tail-not-converged";
    case ErrorKind::OutsideExistenceWindow: return "outside-existence-window";
    case ErrorKind::NoSignChange: return "no-sign-change";
    case ErrorKind::DegenerateTriangle: return "degenerate-triangle";
    case ErrorKind::ZeroField: return "zero-field";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::Io: return "io-error";
  }
  return "unknown";
}

}  // namespace robin
