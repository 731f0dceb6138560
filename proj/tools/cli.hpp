#pragma once

#include <string>
#include <vector>

namespace rlab::cli {

/// Subcommand dispatch; returns the process exit code:
/// 0 success / pass, 1 failed verification, 2 usage or config error.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace rlab::cli
