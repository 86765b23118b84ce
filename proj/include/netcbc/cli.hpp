#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace netcbc {

/// Process exit codes of the command-line front end.
enum ExitCode : int { kOk = 0, kConfigError = 2, kSynthesisInfeasible = 3, kVerificationFailed = 4 };

/// Runs one CLI invocation; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace netcbc
