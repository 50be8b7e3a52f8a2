#pragma once

#include <stdexcept>
#include <string>

namespace boxctl {

// Bad input that the caller can fix (maps to CLI exit status 2).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure could not deliver its post-condition (exit status 3).
// `code` is a short machine-readable tag, e.g. "tie_in_index".
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace boxctl
