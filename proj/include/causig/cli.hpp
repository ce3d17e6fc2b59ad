#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace causig::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitComputation = 1;
inline constexpr int kExitUsage = 2;

// Entry point behind the `causig` binary. args[0] is the program name.
// Errors go to `err` as a single JSON line {"error": code, "message": text}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace causig::cli
