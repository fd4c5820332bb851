#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace geoquery::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

/// Runs the command line (args[0] is the program name) and returns the exit
/// code. Human-readable results go to `out`, logs and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace geoquery::cli
