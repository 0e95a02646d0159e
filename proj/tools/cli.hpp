#pragma once

#include <ostream>

namespace convtopic::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumeric = 3,
};

/// Runs `convtopic <command> [--flag value]...`. The first stdout line is the
/// resolved configuration; reports follow as one JSON document per line.
/// Progress and errors go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace convtopic::cli
