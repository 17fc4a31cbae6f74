#pragma once

#include <string>
#include <vector>

namespace rwt::cli {

// Parses `args` (without the program name), resolves the effective
// configuration, writes effective_config.json and rwt.log next to the output,
// and runs the subcommand. Returns 0 on success, 1 on a domain error, 2 on a
// usage error.
int dispatch(const std::vector<std::string>& args);
int dispatch(int argc, char** argv);

}  // namespace rwt::cli
