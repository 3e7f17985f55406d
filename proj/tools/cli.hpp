#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pmg::cli {

enum ExitCode { kOk = 0, kRejected = 1, kUsage = 2, kGrammarError = 3 };

/// Runs one command line (args exclude the program name) and returns the
/// process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pmg::cli
