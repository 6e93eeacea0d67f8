#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace steinmed::cli {

/// Runs one command line (args[0] is the program name). Returns the exit
/// status: 0 ok, 2 config, 3 data, 4 numerical.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace steinmed::cli
