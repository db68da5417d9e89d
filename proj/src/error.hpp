#pragma once

#include <stdexcept>
#include <string>

namespace hypoctl {

enum class ErrorCode {
  kInvalidArgument = 1,
  kConfig = 2,
  kIo = 3,
  kNumeric = 4,
  kNotStabilizable = 5,
  kConvergence = 6,
  kMismatch = 7,
};

// All failures inside the core are reported through this exception; the C API
// maps `code()` onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace hypoctl
