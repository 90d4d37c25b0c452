#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qrc {

enum class ErrorCategory {
  argument,
  size_limit,
  site_index,
  shape,
  hermiticity,
  numerical,
  integration_instability,
  singular_system,
  data,
  data_format,
  range,
  undefined_correlation,
  io,
};

constexpr std::string_view to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::argument: return "argument";
    case ErrorCategory::size_limit: return "size_limit";
    case ErrorCategory::site_index: return "site_index";
    case ErrorCategory::shape: return "shape";
    case ErrorCategory::hermiticity: return "hermiticity";
    case ErrorCategory::numerical: return "numerical";
    case ErrorCategory::integration_instability: return "integration_instability";
    case ErrorCategory::singular_system: return "singular_system";
    case ErrorCategory::data: return "data";
    case ErrorCategory::data_format: return "data_format";
    case ErrorCategory::range: return "range";
    case ErrorCategory::undefined_correlation: return "undefined_correlation";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

/// Process exit code used by the CLI for each category (0 is success).
constexpr int exit_code(ErrorCategory c) { return 10 + static_cast<int>(c); }

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory c, const std::string& message) {
  throw Error(c, message);
}

inline void require(bool condition, ErrorCategory c, const std::string& message) {
  if (!condition) fail(c, message);
}

}  // namespace qrc
