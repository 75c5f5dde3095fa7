#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fatmargin::cli {

inline constexpr const char* kToolVersion = "1.0.0";

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kSolverError = 3;

/// Runs one invocation; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace fatmargin::cli
