#include "isoctl/error.hpp"

namespace isoctl {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::DirichletAtInternalVertex: return "DirichletAtInternalVertex";
    case ErrorCode::DanglingIncidence: return "DanglingIncidence";
    case ErrorCode::InvalidLength: return "InvalidLength";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::AssemblyAsymmetry: return "AssemblyAsymmetry";
    case ErrorCode::IncommensurateLengths: return "IncommensurateLengths";
    case ErrorCode::NotReal: return "NotReal";
    case ErrorCode::NotOrthogonal: return "NotOrthogonal";
    case ErrorCode::NonPositiveRho: return "NonPositiveRho";
    case ErrorCode::ModulusVanishes: return "ModulusVanishes";
    case ErrorCode::ModulusMismatch: return "ModulusMismatch";
    case ErrorCode::TargetOutOfRange: return "TargetOutOfRange";
    case ErrorCode::NotInGeneratorSpan: return "NotInGeneratorSpan";
    case ErrorCode::InvalidCertificate: return "InvalidCertificate";
    case ErrorCode::TruncationLoss: return "TruncationLoss";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownDomain: return "UnknownDomain";
    case ErrorCode::UnknownGenerator: return "UnknownGenerator";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

}  // namespace isoctl
