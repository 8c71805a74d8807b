#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace awr {

enum class ErrorCode {
  InvalidArgument,
  OverlongMessage,
  SpaceTooLarge,
  NoAlternativeKey,
  DimensionMismatch,
  ParamOutOfRange,
  PoolExhausted,
  InvalidState,
  StrategyNotFiring,
  ConfigMismatch,
  Timeout,
  FrameMalformed,
  TransportError,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OverlongMessage: return "OverlongMessage";
    case ErrorCode::SpaceTooLarge: return "SpaceTooLarge";
    case ErrorCode::NoAlternativeKey: return "NoAlternativeKey";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorCode::PoolExhausted: return "PoolExhausted";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::StrategyNotFiring: return "StrategyNotFiring";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::FrameMalformed: return "FrameMalformed";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error code. Every failure path in
/// the library throws this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace awr
