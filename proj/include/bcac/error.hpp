#pragma once

#include <stdexcept>
#include <string>

namespace bcac {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  InvalidAlphabet,
  Model,
  Domain,
  Config,
  Format,
  Key,
  Decode,
  Capacity,
  Wrap,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

/// 0 success, 2 format, 3 key, 4 capacity, 1 anything else.
inline int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Format:
    case ErrorKind::Decode:
      return 2;
    case ErrorKind::Key:
    case ErrorKind::Wrap:
      return 3;
    case ErrorKind::Capacity:
      return 4;
    default:
      return 1;
  }
}

}  // namespace bcac
