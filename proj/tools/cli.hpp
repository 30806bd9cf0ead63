#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace diffsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitIo = 2;

/// Parses args (without the program name) and runs the selected subcommand.
/// Returns 0 on success, 1 on a domain or validation error, 2 on a usage or
/// I/O error (unknown flag, unreadable or malformed input, unwritable output).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace diffsim::cli
