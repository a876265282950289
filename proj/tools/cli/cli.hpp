#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace secaudit::cli {

/// Entry point of the `audit-agent` command. `args` excludes the program
/// name. Exit codes: 0 success, 1 audit/agent outcome negative, 2 usage or
/// configuration error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace secaudit::cli
