#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qbm::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kValidationFailure = 1, kUsageError = 2 };

/// Entry point of the `qbm` tool. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qbm::cli
