#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace transboost::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kDataError = 2,
  kCheckFailure = 3,
};

// Runs the command line `args` (without the program name). Normal output
// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace transboost::cli
