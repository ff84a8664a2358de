#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hoa::cli {

/// Exit statuses shared by all subcommands.
enum Exit : int {
  kOk = 0,
  kFailed = 1,        // run: no success; check: some assertion is false
  kFloundered = 2,    // run: every derivation floundered
  kUsage = 3,         // parse, configuration or usage error
};

/// Entry point of the `hoa` tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hoa::cli
