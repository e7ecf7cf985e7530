#pragma once

#include <stdexcept>
#include <string>

namespace layoutkit {

enum class ErrorCode {
  InvalidArgument,
  OutOfFrame,
  Bounds,
  Capacity,
  Parse,
  Io,
  Numeric,
  Degenerate,
};

inline const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::OutOfFrame: return "out-of-frame";
    case ErrorCode::Bounds: return "bounds";
    case ErrorCode::Capacity: return "capacity";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Io: return "io";
    case ErrorCode::Numeric: return "numeric";
    case ErrorCode::Degenerate: return "degenerate";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace layoutkit
