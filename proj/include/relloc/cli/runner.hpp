#pragma once

#include <ostream>

namespace relloc::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitCutoff = 3,
  kExitNumerical = 4,
};

/// Parses the command line, runs one experiment and writes its output.
/// Failures print a JSON error object to `err` and return the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace relloc::cli
