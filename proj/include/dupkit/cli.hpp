// Experiment driver behind the `dupkit` executable.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dupkit::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kDataError = 2,
  kInvariantViolation = 3,
};

/// Runs one command line; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dupkit::cli
