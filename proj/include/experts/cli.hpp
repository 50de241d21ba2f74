#pragma once

#include <iosfwd>

namespace experts {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitDomain = 2;
inline constexpr int kExitResource = 3;

// Entry point of the `experts` tool; writes results to `out` (unless --out is
// given) and diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace experts
