#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pbvote::cli {

enum ExitCode : int { kSuccess = 0, kValidationFailure = 1, kUsageError = 2 };

// Runs the command line `args` (without the program name). Results go to `out` or to the
// file named by --output, diagnostics and usage errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pbvote::cli
