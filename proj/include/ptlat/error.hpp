#pragma once

#include <stdexcept>
#include <string>

namespace ptlat {

// Failure classes, ordered by how the CLI reports them:
//   validation / invalid_state / domain        -> exit 2 (bad input)
//   solver and decomposition failures          -> exit 3 (numerical failure)
//   invariant                                  -> exit 4 (internal consistency broken)
enum class ErrorKind {
  validation,
  invalid_state,
  domain,
  no_real_solution,
  out_of_branch,
  unsupported_branch,
  near_bifurcation,
  continuation,
  decomposition_failure,
  near_degenerate_decomposition,
  blow_up,
  invariant,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::invalid_state: return "invalid_state";
    case ErrorKind::domain: return "domain";
    case ErrorKind::no_real_solution: return "no_real_solution";
    case ErrorKind::out_of_branch: return "out_of_branch";
    case ErrorKind::unsupported_branch: return "unsupported_branch";
    case ErrorKind::near_bifurcation: return "near_bifurcation";
    case ErrorKind::continuation: return "continuation";
    case ErrorKind::decomposition_failure: return "decomposition_failure";
    case ErrorKind::near_degenerate_decomposition: return "near_degenerate_decomposition";
    case ErrorKind::blow_up: return "blow_up";
    case ErrorKind::invariant: return "invariant";
  }
  return "unknown";
}

// Exit code the CLI maps this kind to. Library callers may ignore it.
inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::validation:
    case ErrorKind::invalid_state:
    case ErrorKind::domain:
      return 2;
    case ErrorKind::invariant:
      return 4;
    default:
      return 3;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return ptlat::exit_code(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool ok, ErrorKind kind, const std::string& message) {
  if (!ok) fail(kind, message);
}

}  // namespace ptlat
