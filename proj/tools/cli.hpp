#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace boxctl::cli {

/// Runs one subcommand. `args` excludes the program name. The run manifest
/// goes to `out`, a JSON error object to `err`. Returns the exit status:
/// 0 success, 2 usage error, 3 numerical failure, 1 anything else.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace boxctl::cli
