#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sigdesc {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitReject = 2;

/// Runs one command; `args` excludes the program name. Results go to `out`,
/// the effective configuration log and diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sigdesc
