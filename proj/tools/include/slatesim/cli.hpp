#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace slatesim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Runs one subcommand. `args` excludes the program name. Returns the process
// exit status; messages go to `out` and `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace slatesim::cli
