#pragma once

#include <stdexcept>
#include <string>

namespace treemem {

enum class Errc {
  RootHasNoParent,
  LeafHasNoChildren,
  ParseError,
  NonFiniteValue,
  BetaZeroSeries,
  TailUnbounded,
  SingularPivot,
  MaxIterExceeded,
  SeparationViolated,
  MonotonicityViolated,
  InvalidConfig,
  IoError,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::RootHasNoParent: return "RootHasNoParent";
    case Errc::LeafHasNoChildren: return "LeafHasNoChildren";
    case Errc::ParseError: return "ParseError";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::BetaZeroSeries: return "BetaZeroSeries";
    case Errc::TailUnbounded: return "TailUnbounded";
    case Errc::SingularPivot: return "SingularPivot";
    case Errc::MaxIterExceeded: return "MaxIterExceeded";
    case Errc::SeparationViolated: return "SeparationViolated";
    case Errc::MonotonicityViolated: return "MonotonicityViolated";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

  // Process exit code used by the CLI. 2 = bad input, 3 = solver failure,
  // 4 = violated solver invariant (indicates a bug, never expected to fire).
  int exit_code() const noexcept {
    switch (code_) {
      case Errc::InvalidConfig:
      case Errc::ParseError:
      case Errc::SeparationViolated:
      case Errc::IoError:
        return 2;
      case Errc::MonotonicityViolated:
        return 4;
      default:
        return 3;
    }
  }

 private:
  Errc code_;
};

struct IterationFailure : Error {
  IterationFailure(Errc code, const std::string& what, long iterations, double residual)
      : Error(code, what), iterations(iterations), residual(residual) {}
  long iterations = 0;
  double residual = 0.0;
};

}  // namespace treemem
