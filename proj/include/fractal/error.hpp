#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fractal {

enum class ErrorCode {
  InvalidDirection,
  DepthTooLarge,
  InvalidSpec,
  ShapeNotSupported,
  OffsetTooLarge,
  EnclosingGridMismatch,
  NotBlockContiguous,
  NotBijection,
  NonPositiveDelta,
  DimensionMismatch,
  ShapeMismatch,
  LengthMismatch,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidDirection: return "InvalidDirection";
    case ErrorCode::DepthTooLarge: return "DepthTooLarge";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ShapeNotSupported: return "ShapeNotSupported";
    case ErrorCode::OffsetTooLarge: return "OffsetTooLarge";
    case ErrorCode::EnclosingGridMismatch: return "EnclosingGridMismatch";
    case ErrorCode::NotBlockContiguous: return "NotBlockContiguous";
    case ErrorCode::NotBijection: return "NotBijection";
    case ErrorCode::NonPositiveDelta: return "NonPositiveDelta";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

// Every failure raised by the library carries a code so callers (and tests)
// can branch on the kind of error without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fractal
