#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gece {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one command line (without the program name). Human-readable output
/// goes to `out`, diagnostics to `err`; machine reports are written as files.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gece
