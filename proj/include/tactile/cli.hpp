#pragma once

// Command-line front end. Exit codes: 0 success, 1 argument or generic
// error, 2 I/O failure, 3 shape or compatibility mismatch.

#include <iosfwd>

namespace tactile {

inline constexpr int kExitOk = 0;
inline constexpr int kExitGeneric = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitShape = 3;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tactile
