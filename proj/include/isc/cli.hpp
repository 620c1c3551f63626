#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace isc {

enum ExitCode : int { kExitOk = 0, kExitUserError = 1, kExitSolverError = 2 };

// Entry point for the `isc` tool. args[0] is the program name.
// Subcommands: analyze, sweep, simulate, phase.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace isc
