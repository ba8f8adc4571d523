#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace cuescreen::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitEndpointError = 2;

inline constexpr unsigned long long kDefaultSeed = 7;

/// Runs one subcommand. `args` excludes the program name. Diagnostics go to
/// `err`; help text to `out`.
int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace cuescreen::cli
