#include "sparsetw/rng.hpp"

#include <atomic>
#include <cstdio>

#include "sparsetw/error.hpp"

namespace sparsetw {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t RngStream::derived_seed() const {
  // Two rounds so that neighbouring (seed, index) pairs land far apart.
  return splitmix64(splitmix64(master_seed) ^ splitmix64(stream_index + 0x632be59bd9b4e019ULL));
}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::UnsupportedK: return "unsupported-k";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::NoUpperRoot: return "no-upper-root";
    case ErrorKind::AmbiguousRoot: return "ambiguous-root";
    case ErrorKind::BracketFailure: return "bracket-failure";
    case ErrorKind::QuadratureNonconvergence: return "quadrature-nonconvergence";
    case ErrorKind::SolverFailure: return "solver-failure";
    case ErrorKind::SizeLimitExceeded: return "size-limit-exceeded";
    case ErrorKind::MissingVectors: return "missing-vectors";
    case ErrorKind::ParseError: return "parse-error";
    case ErrorKind::DegenerateP: return "degenerate-p";
    case ErrorKind::EmptyGraph: return "empty-graph";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

namespace {
void stderr_warning(std::string_view msg) {
  std::fprintf(stderr, "warning: %.*s\n", static_cast<int>(msg.size()), msg.data());
}
std::atomic<WarningHandler> g_warning_handler{&stderr_warning};
}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  return g_warning_handler.exchange(handler ? handler : &stderr_warning);
}

void warn(std::string_view message) { g_warning_handler.load()(message); }

}  // namespace sparsetw
