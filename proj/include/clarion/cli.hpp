#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace clarion {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one `clarion` subcommand. args excludes the program name.
/// Results go to `out`, diagnostics to `err`.
int run_command(std::span<const std::string> args, std::istream& in, std::ostream& out,
                std::ostream& err);

}  // namespace clarion
