#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace staccato::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kDataError = 2;
inline constexpr int kInfeasible = 3;

// Runs the `staccato` command line. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace staccato::cli
