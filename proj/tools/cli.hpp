#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gssl::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kDataError = 3;
inline constexpr int kNumericalError = 4;

// Runs one gssl invocation; args excludes the program name. Results go to
// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gssl::cli
