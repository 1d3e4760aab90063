#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specband {

/// Every numerical failure the library can report. The CLI maps these to exit code 3.
enum class ErrorCode {
  EmptyCoefficients,
  NonPositiveHopping,
  LengthMismatch,
  OutsideBandInterior,
  OutsideSpectrum,
  RootCountMismatch,
  EigenvalueInBand,
  DerivativeSingularity,
  DivergentNormSum,
  QuadratureBudgetExceeded,
  TruncationTooLarge,
  RangeTooSmall,
  InsufficientPoints,
  NonPositiveNorm,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyCoefficients: return "EmptyCoefficients";
    case ErrorCode::NonPositiveHopping: return "NonPositiveHopping";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::OutsideBandInterior: return "OutsideBandInterior";
    case ErrorCode::OutsideSpectrum: return "OutsideSpectrum";
    case ErrorCode::RootCountMismatch: return "RootCountMismatch";
    case ErrorCode::EigenvalueInBand: return "EigenvalueInBand";
    case ErrorCode::DerivativeSingularity: return "DerivativeSingularity";
    case ErrorCode::DivergentNormSum: return "DivergentNormSum";
    case ErrorCode::QuadratureBudgetExceeded: return "QuadratureBudgetExceeded";
    case ErrorCode::TruncationTooLarge: return "TruncationTooLarge";
    case ErrorCode::RangeTooSmall: return "RangeTooSmall";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::NonPositiveNorm: return "NonPositiveNorm";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace specband
