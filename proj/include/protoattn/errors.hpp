#pragma once

#include <stdexcept>
#include <string>

namespace protoattn {

/// Input data (pixels, parameters, files) that cannot be processed.
class MalformedInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run or model configuration. Carries the offending line when the
/// error came from a config file (0 otherwise).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Caller broke an API contract, e.g. stepping a finished episode.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace protoattn
