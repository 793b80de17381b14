#include "chromex/error.hpp"

namespace chromex {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::shape_mismatch: return "shape_mismatch";
    case ErrorCode::kind_mismatch: return "kind_mismatch";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::io: return "io";
    case ErrorCode::corrupt: return "corrupt";
    case ErrorCode::version_mismatch: return "version_mismatch";
    case ErrorCode::config_mismatch: return "config_mismatch";
    case ErrorCode::empty_input: return "empty_input";
    case ErrorCode::insufficient_points: return "insufficient_points";
    case ErrorCode::no_foreground: return "no_foreground";
  }
  return "unknown";
}

}  // namespace chromex
