#pragma once

#include <string>
#include <vector>

namespace fracwave::cli {

/// Exit codes of the command-line driver.
enum Exit : int { Ok = 0, NumericalFailure = 1, ValidationFailure = 2 };

/// Runs "fracwave <subcommand> [flags]" with args excluding the program
/// name. Errors are reported on stderr and mapped to exit codes.
int run(const std::vector<std::string>& args);

}  // namespace fracwave::cli
