#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mner::cli {

// Runs the command line `args` (args[0] is the program name) and returns
// the process exit status. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mner::cli
