#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace swarmcast {

enum class ErrorKind {
  InvalidInput,
  DegenerateGraph,   // isolated vertex where a degree inverse is needed
  Disconnected,      // no single consensus / zero eigenvalue is repeated
  SizeLimit,
  NotApplicable,     // structural premise of a preservation rule fails
  Validation,        // malformed scenario or command
  Conflict,          // operation not allowed in the current session status
  NotFound,
};

inline constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::DegenerateGraph: return "degenerate-graph";
    case ErrorKind::Disconnected: return "disconnected";
    case ErrorKind::SizeLimit: return "size-limit";
    case ErrorKind::NotApplicable: return "not-applicable";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Conflict: return "conflict";
    case ErrorKind::NotFound: return "not-found";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace swarmcast
