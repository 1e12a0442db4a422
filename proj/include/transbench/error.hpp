#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace transbench {

/// Base class for every error raised by the library. `code()` is a stable,
/// machine-parsable identifier such as "DuplicateSampleId".
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Raised for invalid user configuration (unknown languages, bad flags).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("ConfigError", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("IoFailure", message) {}
};

}  // namespace transbench
