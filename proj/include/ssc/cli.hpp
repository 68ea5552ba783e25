#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ssc::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIo = 2,
  kDomain = 3,
};

/// Runs the `ssc` command line with `args` (program name excluded). Reports go
/// to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ssc::cli
