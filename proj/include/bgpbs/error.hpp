#pragma once

#include <stdexcept>
#include <string>

namespace bgpbs {

enum class ErrorKind {
  invalid_input,
  parse,
  empty_input,
  schema,
  split,
  leakage,
  io,
  diverged,
};

const char* to_string(ErrorKind kind) noexcept;

// Process exit code for the CLI: 1 invalid input/config, 2 I/O, 3 diverged.
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace bgpbs
