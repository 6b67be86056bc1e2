#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hsipnp {

enum class ErrorCode {
  DimensionMismatch,
  InvalidArgument,
  NonFinite,
  SizeGuard,
  EmptyObservation,
  StaleCache,
  Diverged,
  BadMagic,
  UnsupportedVersion,
  CrcMismatch,
  Truncated,
  Io,
};

/// Stable machine-readable name, used in the CLI's JSON error objects.
std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace hsipnp
