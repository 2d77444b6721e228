#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lingua::cli {

// Runs one subcommand (args exclude the program name). Returns the exit
// status: 0 success, 1 failure, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lingua::cli
