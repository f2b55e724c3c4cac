#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pman::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kData = 3,
  kTransport = 4,
  kNoValidAssessments = 5,
  kConfig = 6,
};

/// Runs the `pman` command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pman::cli
