#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cue {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_validation = 2,
    exit_missing_input = 3,
    exit_metric_undefined = 4,
};

/// Entry point of the `cue` tool; args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cue
