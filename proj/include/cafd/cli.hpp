#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cafd {

// Exit statuses of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitNumericalError = 2;

/// Runs the command line `args` (without the program name). Reports go to
/// `out` unless redirected with --out/--report; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cafd
