#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qism {

enum class ErrorCode {
  ModeMismatch,
  DivisionByZero,
  NearPole,
  ExactModeUnsupported,
  DegenerateKernel,
  PoleAtCoincidentArguments,
  IndexOutOfRange,
  InvalidRange,
  NonAdjacentRanges,
  InvalidChain,
  CoincidentParameters,
  InvalidExcitationCount,
  ProbeCoincidesWithRoot,
  NoConvergence,
  CollapsedRoots,
  SingularRoots,
  ZeroVector,
  InvalidSplit,
  HomogeneousOnly,
  VanishingLocalEigenvalue,
  DimensionCap,
  UnmatchedCertificate,
  ProbeMismatch,
  ConfigInvalid,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ModeMismatch: return "ModeMismatch";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::NearPole: return "NearPole";
    case ErrorCode::ExactModeUnsupported: return "ExactModeUnsupported";
    case ErrorCode::DegenerateKernel: return "DegenerateKernel";
    case ErrorCode::PoleAtCoincidentArguments: return "PoleAtCoincidentArguments";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::NonAdjacentRanges: return "NonAdjacentRanges";
    case ErrorCode::InvalidChain: return "InvalidChain";
    case ErrorCode::CoincidentParameters: return "CoincidentParameters";
    case ErrorCode::InvalidExcitationCount: return "InvalidExcitationCount";
    case ErrorCode::ProbeCoincidesWithRoot: return "ProbeCoincidesWithRoot";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::CollapsedRoots: return "CollapsedRoots";
    case ErrorCode::SingularRoots: return "SingularRoots";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::InvalidSplit: return "InvalidSplit";
    case ErrorCode::HomogeneousOnly: return "HomogeneousOnly";
    case ErrorCode::VanishingLocalEigenvalue: return "VanishingLocalEigenvalue";
    case ErrorCode::DimensionCap: return "DimensionCap";
    case ErrorCode::UnmatchedCertificate: return "UnmatchedCertificate";
    case ErrorCode::ProbeMismatch: return "ProbeMismatch";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the toolkit carries one of the codes above so that
/// callers (tests, the CLI report writer) can dispatch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qism
