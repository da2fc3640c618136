#pragma once

#include <string>
#include <vector>

namespace tubelet {

// Runs the command-line tool on the given arguments (program name excluded).
// Returns the process exit status; diagnostics go to stderr.
int cli_run(const std::vector<std::string>& args);

}  // namespace tubelet
