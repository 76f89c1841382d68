#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rrambb {

enum class ErrorKind {
  OddLength,
  BadLength,
  ShapeMismatch,
  ModeMismatch,
  ProgrammingFailure,
  SingularSystem,
  NoConvergence,
  UnsupportedSize,
  EmptyInput,
  EmptyLedger,
  InsufficientData,
  InvalidArgument,
  ConfigError,
  IoError,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::OddLength: return "OddLength";
    case ErrorKind::BadLength: return "BadLength";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::ModeMismatch: return "ModeMismatch";
    case ErrorKind::ProgrammingFailure: return "ProgrammingFailure";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::UnsupportedSize: return "UnsupportedSize";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::EmptyLedger: return "EmptyLedger";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

inline void require(bool condition, ErrorKind kind, const char* message) {
  if (!condition) fail(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace rrambb
