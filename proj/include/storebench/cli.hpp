#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace storebench {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitHalt = 3;
inline constexpr int kExitRuntime = 4;

/// Runs one subcommand. `args` excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace storebench
