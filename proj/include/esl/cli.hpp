#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace esl {

/// Runs the eslcheck command line: subcommands check (default), validate,
/// count and oracle. Returns the process exit code: 0 when every formula
/// holds (or the subcommand succeeds), 1 when a formula fails or the
/// differential suite finds a mismatch, 2 on usage, parse or validation
/// errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace esl
