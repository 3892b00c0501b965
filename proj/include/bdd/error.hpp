#pragma once

#include <stdexcept>
#include <string>

namespace bdd {

// Error categories map 1:1 onto the CLI exit codes (see tools/bddsolve.cpp):
// parse -> 2, precondition -> 3, numerical -> 4, size_cap -> 5.
enum class ErrorKind {
  invalid_input,   // malformed data (NaN/Inf, bad dimensions, bad file)
  parameter,       // out-of-range parameter
  precondition,    // contract violated by the caller (not bDD, not PD, ...)
  degenerate,      // zero/empty input where a nonzero one is required
  numerical,       // breakdown during computation (singular pivot, divergence)
  size_cap,        // request exceeds a hard size limit (oracle cap)
  improbable,      // randomized routine exhausted its retry budget
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

}  // namespace bdd
