#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace sparsetw {

inline constexpr std::string_view kVersion = "0.1.0";

namespace cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Runs one subcommand. `args` excludes the program name.
/// Returns 0 on success, 1 on validation errors, 2 on runtime errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Exact-identity suite used by `selftest`; prints one line per check.
bool run_selftest(std::ostream& out);

}  // namespace cli
}  // namespace sparsetw
