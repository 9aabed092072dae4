#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace linsync::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kNotSynchronizable = 1;
inline constexpr int kUsageError = 2;
inline constexpr int kNumericalFailure = 3;

/// Runs one command line. `args` excludes the program name. Normal output
/// goes to `out`, diagnostics and progress to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace linsync::cli
