#pragma once

#include <iosfwd>

namespace svshrink::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitInternal = 4;

/// Entry point shared by the executable and the tests. argv[0] is the program
/// name; output goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace svshrink::cli
