#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace upress {

// Typed failure reasons. Every refusal surfaced by the CLI maps onto one of
// these, and reason() gives the machine-readable spelling.
enum class ErrorCode {
  InvalidArgument,
  Config,
  UnderResolved,
  Radius,
  Depth,
  NoConvergence,
  FrameNotReady,
  UnsupportedStructure,
  Unsupported,
  TooLarge,
  ParameterOutOfRange,
  DimensionMismatch,
  NotProbability,
  CheckFailed,
  Io,
};

std::string_view reason(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

}  // namespace upress
