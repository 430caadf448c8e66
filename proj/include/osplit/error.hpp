#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace osplit {

enum class ErrorCode {
  // dataset
  MissingUnit,
  TreatmentViolation,
  NonNumericOutcome,
  EmptyFile,
  IndexOutOfRange,
  DegenerateSplit,
  Io,
  // senswilcox
  EmptyInput,
  NonFiniteValue,
  TooLarge,
  InvalidGamma,
  InvalidAlpha,
  TooFew,
  NonPositiveVariance,
  BoundaryP1,
  InvalidPValues,
  // splitopt
  DegenerateEta,
  ZeroVariance,
  EmptyGrid,
  AllDegenerate,
  // simbench
  ConfigInvalid,
  InsufficientUnits,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingUnit: return "MissingUnit";
    case ErrorCode::TreatmentViolation: return "TreatmentViolation";
    case ErrorCode::NonNumericOutcome: return "NonNumericOutcome";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::Io: return "Io";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::InvalidGamma: return "InvalidGamma";
    case ErrorCode::InvalidAlpha: return "InvalidAlpha";
    case ErrorCode::TooFew: return "TooFew";
    case ErrorCode::NonPositiveVariance: return "NonPositiveVariance";
    case ErrorCode::BoundaryP1: return "BoundaryP1";
    case ErrorCode::InvalidPValues: return "InvalidPValues";
    case ErrorCode::DegenerateEta: return "DegenerateEta";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::AllDegenerate: return "AllDegenerate";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::InsufficientUnits: return "InsufficientUnits";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace osplit
