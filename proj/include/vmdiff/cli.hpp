#pragma once

#include <string>
#include <vector>

namespace vmdiff::cli {

// Exit codes of the vmdiff tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitBackendFailure = 2;
inline constexpr int kExitNotAccepted = 3;

// Entry point shared by the binary and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args);

}  // namespace vmdiff::cli
