#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace abstrip {

/// Exit codes of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_domain = 1, exit_usage = 2 };

/// Runs the `abstrip` command line. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace abstrip
