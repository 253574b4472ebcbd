#pragma once

#include <string>
#include <vector>

namespace botsort {

/// Entry point of the `botsort` command line: track, interp, eval and gmc subcommands.
/// Returns the process exit code; errors are reported as one line on stderr.
int run_cli(int argc, char** argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace botsort
