#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specest {

/// Failure categories raised by the library. Each maps onto a precondition or
/// numerical failure of one operation; the CLI translates them to exit codes.
enum class Errc {
  LengthMismatch,
  OutOfRangeLocation,
  NonPositiveIntensity,
  ZeroSeparation,
  TooLarge,
  NotSquare,
  ConvergenceFailure,
  RankDeficient,
  ShapeMismatch,
  NotOrthonormal,
  NotPowerOfTwo,
  InvalidRank,
  RankDeficientUpBlock,
  SolverFailure,
  PreconditionViolated,
  NearCoincident,
  GapNonpositive,
  ConfigInvalid,
  InsufficientData,
  ParseError,
  IoError,
};

inline std::string_view to_string(Errc e) noexcept {
  switch (e) {
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::OutOfRangeLocation: return "OutOfRangeLocation";
    case Errc::NonPositiveIntensity: return "NonPositiveIntensity";
    case Errc::ZeroSeparation: return "ZeroSeparation";
    case Errc::TooLarge: return "TooLarge";
    case Errc::NotSquare: return "NotSquare";
    case Errc::ConvergenceFailure: return "ConvergenceFailure";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NotOrthonormal: return "NotOrthonormal";
    case Errc::NotPowerOfTwo: return "NotPowerOfTwo";
    case Errc::InvalidRank: return "InvalidRank";
    case Errc::RankDeficientUpBlock: return "RankDeficientUpBlock";
    case Errc::SolverFailure: return "SolverFailure";
    case Errc::PreconditionViolated: return "PreconditionViolated";
    case Errc::NearCoincident: return "NearCoincident";
    case Errc::GapNonpositive: return "GapNonpositive";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace specest
