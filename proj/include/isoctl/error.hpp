#pragma once

#include <stdexcept>
#include <string>

namespace isoctl {

enum class ErrorCode {
  DisconnectedGraph,
  DirichletAtInternalVertex,
  DanglingIncidence,
  InvalidLength,
  GridTooCoarse,
  GridMismatch,
  ConvergenceFailure,
  AssemblyAsymmetry,
  IncommensurateLengths,
  NotReal,
  NotOrthogonal,
  NonPositiveRho,
  ModulusVanishes,
  ModulusMismatch,
  TargetOutOfRange,
  NotInGeneratorSpan,
  InvalidCertificate,
  TruncationLoss,
  StepTooLarge,
  ParseError,
  UnknownDomain,
  UnknownGenerator,
  InvalidArgument,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace isoctl
