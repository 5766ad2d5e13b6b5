#pragma once

#include <stdexcept>
#include <string>

namespace svda {

enum class ErrorKind {
  shape_mismatch,
  invalid_argument,
  non_finite,
  io,
  format,
  config,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::shape_mismatch: return "shape-mismatch";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::non_finite: return "non-finite";
    case ErrorKind::io: return "io";
    case ErrorKind::format: return "format";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

/// Exception carrying a machine-readable category; the CLI maps it onto a
/// single-line "error: <kind>: <message>" report.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace svda
