#pragma once

#include <string>
#include <vector>

namespace clir::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsage = 1,
    kData = 2,
    kTransport = 3,
};

/// Runs `clir-lab` with args[0] as the program name. Never throws.
int run(const std::vector<std::string>& args);

}  // namespace clir::cli
