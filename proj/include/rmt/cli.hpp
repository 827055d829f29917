#pragma once

#include <iosfwd>

namespace rmt::cli {

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitCheckFailed = 2;
constexpr int kExitUsage = 64;

/// Parses argv, runs one subcommand and writes its CSV/JSON outputs. Returns
/// the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rmt::cli
