#pragma once

#include <iosfwd>

namespace wvic {

/// Exit codes of the `wvic` command.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitNumerical = 3,
};

/// Entry point of the `wvic` command; results go to `out`, a single-line
/// diagnostic to `err` on failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace wvic
