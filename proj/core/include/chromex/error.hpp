#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chromex {

enum class ErrorCode {
  invalid_argument,
  out_of_range,
  shape_mismatch,
  kind_mismatch,
  not_found,
  io,
  corrupt,
  version_mismatch,
  config_mismatch,
  empty_input,
  insufficient_points,
  no_foreground,
};

/// Stable token for an error code, used in CLI and HTTP error bodies.
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace chromex
