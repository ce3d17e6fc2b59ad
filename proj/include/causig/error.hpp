#pragma once

#include <stdexcept>
#include <string>

namespace causig {

// Machine-readable error categories. The CLI prints these on stderr.
enum class ErrorCode {
  InvalidArgument,
  ShapeMismatch,
  NonFinite,
  Singular,
  Unstable,
  NotFound,
  Io,
  Parse,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Non-fatal diagnostics (rank deficiency, ill-conditioned eigenbases, skipped
// subjects). Written to stderr unless silenced.
void warn(const std::string& message);
void set_warnings_enabled(bool enabled);

}  // namespace causig
