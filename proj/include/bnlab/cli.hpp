#pragma once

// Command-line entry point, callable in-process so tests can drive every
// command. Exit codes: 0 success, 1 usage or input error, 2 impossible
// evidence (with a culprit line on the error stream).

#include <iosfwd>
#include <string>
#include <vector>

namespace bnlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitImpossible = 2;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bnlab::cli
