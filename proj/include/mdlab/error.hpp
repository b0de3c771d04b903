#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mdlab {

enum class ErrorCode {
  InclusionTooClose,
  Degenerate,
  RadiiTooClose,
  TagNotFound,
  OpenLoop,
  Nonconforming,
  DimensionMismatch,
  NotSpd,
  PrecondNotSpd,
  Breakdown,
  InsufficientPoints,
  InvalidArgument,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InclusionTooClose: return "INCLUSION_TOO_CLOSE";
    case ErrorCode::Degenerate: return "DEGENERATE";
    case ErrorCode::RadiiTooClose: return "RADII_TOO_CLOSE";
    case ErrorCode::TagNotFound: return "TAG_NOT_FOUND";
    case ErrorCode::OpenLoop: return "OPEN_LOOP";
    case ErrorCode::Nonconforming: return "NONCONFORMING";
    case ErrorCode::DimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::NotSpd: return "NOT_SPD";
    case ErrorCode::PrecondNotSpd: return "PRECOND_NOT_SPD";
    case ErrorCode::Breakdown: return "BREAKDOWN";
    case ErrorCode::InsufficientPoints: return "INSUFFICIENT_POINTS";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::Io: return "IO";
  }
  return "UNKNOWN";
}

/// Exception carrying a machine-readable error code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mdlab
