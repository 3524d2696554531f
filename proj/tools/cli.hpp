#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mixboot::cli {

/// Runs one invocation of the `mixboot` tool. `args` excludes the program
/// name. Results go to `out` (or the --out file), structured errors to `err`.
/// Returns the process exit status: nonzero iff an error was reported.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mixboot::cli
