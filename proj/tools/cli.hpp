#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace msc::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIo = 2,
  kInfeasible = 3,
  kInvalidSpec = 4,
  kStatistics = 5,
};

/// Runs one `msc` invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace msc::cli
