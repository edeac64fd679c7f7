#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rtdc::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kVerifyFailed = 1,
  kUsage = 2,  ///< bad flags or a malformed matrix file
  kSolver = 3,
  kIo = 4,
};

/// Runs one invocation. args excludes the program name; data goes to out,
/// diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rtdc::cli
