#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace imagestar::cli {

enum ExitCode : int { kRobust = 0, kNotRobust = 1, kUnknown = 2, kError = 3 };

/// Entry point for the `imagestar` tool. Never throws; failures print to
/// `err` and return kError.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace imagestar::cli
