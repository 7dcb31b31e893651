#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace anglesizer::cli {

enum ExitCode : int {
  kOk = 0,
  kEnvironment = 1,
  kUsage = 2,
  kMeasurementFailed = 3,
};

/// Runs one command line (without the program name) and returns the exit
/// code. Normal output goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Trace file expected for task `index` (0-based) of an assessment batch.
std::string task_trace_name(std::size_t index);

}  // namespace anglesizer::cli
