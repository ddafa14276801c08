#include "bgpbs/error.hpp"

namespace bgpbs {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid input";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::empty_input: return "empty input";
    case ErrorKind::schema: return "schema error";
    case ErrorKind::split: return "split error";
    case ErrorKind::leakage: return "leakage error";
    case ErrorKind::io: return "I/O error";
    case ErrorKind::diverged: return "training diverged";
  }
  return "unknown error";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::io: return 2;
    case ErrorKind::diverged: return 3;
    default: return 1;
  }
}

}  // namespace bgpbs
