#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace augmotion::cli {

/// Exit codes, also listed in `augmotion --help`.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,       // unknown subcommand or flag, malformed arguments
  kExitIo = 3,          // missing or unreadable input, unwritable output
  kExitConfig = 4,      // configuration value out of range
  kExitBadInput = 5,    // input parses but violates the schema or invariants
  kExitNumerical = 6,   // degenerate geometry, out-of-volume joints, flat channels
  kExitSelfTest = 7,    // a self-test check failed
};

/// Runs one subcommand. Results go to `out` (or files), diagnostics and the
/// JSON error object to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace augmotion::cli
