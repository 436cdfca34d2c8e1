#pragma once

#include <iosfwd>

namespace emojichat::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Entry point behind the `emojichat` binary. `in` feeds the chat loop.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace emojichat::cli
