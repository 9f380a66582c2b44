#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qkdnar {

inline constexpr const char* kToolVersion = "1.0.0";

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;    // bad flags, validation failure, infeasible plan
inline constexpr int kExitSizeGuard = 3;  // instance too large for the exact solver or LP export
inline constexpr int kExitIo = 4;

// Runs one command line (args[0] is the program name). Subcommands: gen,
// solve, eval, sweep, export-lp.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qkdnar
