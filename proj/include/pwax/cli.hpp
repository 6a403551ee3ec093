#pragma once

#include <string>
#include <vector>

namespace pwax::cli {

/// Entry point for the command-line tool; `args` excludes the program
/// name. Returns the process exit status.
int run(const std::vector<std::string>& args);

} // namespace pwax::cli
