#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace langx {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInvalidSpec = 1,   // parse or validation diagnostics, unreadable input
  kExitTransform = 2,     // add-subtyping / derive-ck could not transform the spec
  kExitStuck = 3,
  kExitOutOfFuel = 4,
  kExitDisagreement = 5,  // compare found a term on which the semantics differ
  kExitUsage = 64,
};

/// Runs the tool; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace langx
