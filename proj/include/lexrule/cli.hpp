#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lexrule::cli {

enum ExitCode { ok = 0, data_error = 1, usage_error = 2 };

/// `args` excludes the program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lexrule::cli
