#pragma once

#include <stdexcept>
#include <string>

namespace mecoff {

enum class ErrorCode {
  InvalidArgument,
  InvalidConfig,
  DistanceTooSmall,
  NotPositiveDefinite,
  ZeroReceiveVector,
  ZeroRate,
  DomainViolation,
  InnerInfeasible,
  SdpFailed,
  TooLarge,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mecoff
