#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ialcpg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

/// args excludes the program name. Failures print one line
/// "<category>: <message>" to err and return the matching exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace ialcpg::cli
