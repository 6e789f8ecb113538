#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sv2::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kUnparseable = 2,
    kPartial = 3,
};

// `args` excludes the program name. Data goes to `out`, diagnostics to
// `err`. `terminal` selects the table format when none is requested.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool terminal = false);

}  // namespace sv2::cli
