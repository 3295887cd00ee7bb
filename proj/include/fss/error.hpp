#pragma once

#include <stdexcept>
#include <string>

namespace fss {

/// Failure categories. Each maps onto one CLI exit code.
enum class ErrorKind {
  invalid_streamline,
  arity,
  empty_domain,
  insufficient_extent,
  degenerate_geometry,
  invalid_spec,
  frame_mismatch,
  format,
  io,
  config,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// 2 usage, 3 data/format, 4 numeric/degenerate.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::invalid_spec:
      return 2;
    case ErrorKind::arity:
    case ErrorKind::frame_mismatch:
    case ErrorKind::format:
    case ErrorKind::io:
    case ErrorKind::invalid_streamline:
      return 3;
    case ErrorKind::empty_domain:
    case ErrorKind::insufficient_extent:
    case ErrorKind::degenerate_geometry:
      return 4;
  }
  return 4;
}

}  // namespace fss
