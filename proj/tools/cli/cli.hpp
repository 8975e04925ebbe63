// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace translit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitAbort = 3;

/// Runs `translit <subcommand> ...` with argv[0] as the program name and
/// returns the process exit status. Normal output goes to `out`,
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace translit::cli
