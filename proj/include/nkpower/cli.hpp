#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nkpower {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

// Subcommands: fit, simulate, sweep, report, calibrate. `args` excludes the
// program name.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nkpower
