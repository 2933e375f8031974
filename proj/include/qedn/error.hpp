#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qedn {

enum class ErrorKind {
  NotFound,
  Conflict,
  StateError,
  Invalid,
  NoPath,
  AlreadyConnected,
  Inconsistent,
  Undefined,
  Parse,
};

std::string_view to_string(ErrorKind kind);

/// Every library failure is reported through this type; `kind()` says which
/// contract was broken.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qedn
