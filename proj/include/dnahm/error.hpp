#pragma once

#include <stdexcept>
#include <string>

namespace dnahm {

enum class ErrorCode {
  DimensionMismatch,
  NonFinite,
  NotHermitian,
  NoConvergence,
  NotPositiveDefinite,
  Singular,
  DegenerateLeadingCoefficient,
  InvalidChain,
  SingularGamma,
  NotRealityCompatible,
  SingularGauge,
  InvalidMetric,
  InvalidSurface,
  DegenerateSlice,
  PointNotOnCurve,
  ChainTooShort,
  InvalidSite,
  EtaNearZero,
  SingularPminus,
  InvalidMass,
  InconsistentScalars,
  SeedExhausted,
  RangeNotCovered,
  InvalidStepList,
  ParseError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::DegenerateLeadingCoefficient: return "DegenerateLeadingCoefficient";
    case ErrorCode::InvalidChain: return "InvalidChain";
    case ErrorCode::SingularGamma: return "SingularGamma";
    case ErrorCode::NotRealityCompatible: return "NotRealityCompatible";
    case ErrorCode::SingularGauge: return "SingularGauge";
    case ErrorCode::InvalidMetric: return "InvalidMetric";
    case ErrorCode::InvalidSurface: return "InvalidSurface";
    case ErrorCode::DegenerateSlice: return "DegenerateSlice";
    case ErrorCode::PointNotOnCurve: return "PointNotOnCurve";
    case ErrorCode::ChainTooShort: return "ChainTooShort";
    case ErrorCode::InvalidSite: return "InvalidSite";
    case ErrorCode::EtaNearZero: return "EtaNearZero";
    case ErrorCode::SingularPminus: return "SingularPminus";
    case ErrorCode::InvalidMass: return "InvalidMass";
    case ErrorCode::InconsistentScalars: return "InconsistentScalars";
    case ErrorCode::SeedExhausted: return "SeedExhausted";
    case ErrorCode::RangeNotCovered: return "RangeNotCovered";
    case ErrorCode::InvalidStepList: return "InvalidStepList";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Library-wide exception. `value()` carries the diagnostic number attached to
/// the failure (smallest eigenvalue, condition estimate, max deviation, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, double value = 0.0)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        value_(value) {}

  ErrorCode code() const noexcept { return code_; }
  double value() const noexcept { return value_; }

 private:
  ErrorCode code_;
  double value_;
};

}  // namespace dnahm
