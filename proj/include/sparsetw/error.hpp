#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sparsetw {

enum class ErrorKind {
  InvalidParameter,
  DimensionMismatch,
  UnsupportedK,
  EmptyInput,
  NoUpperRoot,
  AmbiguousRoot,
  BracketFailure,
  QuadratureNonconvergence,
  SolverFailure,
  SizeLimitExceeded,
  MissingVectors,
  ParseError,
  DegenerateP,
  EmptyGraph,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

// Non-fatal diagnostics (permissive root selection, regime warnings).
// The default handler writes to stderr.
using WarningHandler = void (*)(std::string_view);
WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace sparsetw
