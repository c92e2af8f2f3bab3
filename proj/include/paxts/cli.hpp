#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace paxts::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;

/// Runs one command. args[0] is the program name. Artifacts go to --out or
/// `out`; diagnostics are single-line JSON objects on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace paxts::cli
