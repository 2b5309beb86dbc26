#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace interlace::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kViolation = 1;
inline constexpr int kUsage = 2;
inline constexpr int kRuntime = 3;  // solver did not converge, budget exceeded, ...

/// Runs the command line `args` (without the program name). Results go to
/// `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace interlace::cli
