#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aquagauge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 2;
inline constexpr int kExitInternalError = 3;

// Runs one CLI invocation. args[0] is the program name. Results go to `out`,
// the run log (resolved configuration, dropped rows) and errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aquagauge::cli
