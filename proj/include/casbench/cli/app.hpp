#pragma once

#include <string>
#include <vector>

#include "casbench/cli/commands.hpp"

namespace casbench::cli {

/// Parses `args` (without the program name) and runs the chosen command.
/// Harness errors are reported on io.err and give exit code 1.
int run_cli(const std::vector<std::string>& args, CliIo& io);

}  // namespace casbench::cli
