#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fluidq {

enum class ErrorKind {
  invalid_argument,
  invalid_config,
  invalid_initial,
  invalid_distribution,
  no_equilibrium,
  grid_mismatch,
  numerical_failure,
};

std::string_view to_string(ErrorKind kind);

/// Exception carrying a machine-readable kind alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace fluidq
