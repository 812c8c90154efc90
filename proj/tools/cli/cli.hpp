#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace originet::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // numeric or protocol failure, failed check
inline constexpr int kExitUsage = 2;    // bad arguments, config or I/O

/// Runs the command line `args` (without the program name), writing normal
/// output to `out` and diagnostics to `err`. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace originet::cli
