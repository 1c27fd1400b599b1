#pragma once

#include <ostream>

namespace esa::cli {

/// Exit codes shared by every subcommand.
enum Exit : int { kOk = 0, kConfigError = 2, kInputError = 3, kNumericalError = 4 };

/// Parses arguments, runs one subcommand and maps failures to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace esa::cli
