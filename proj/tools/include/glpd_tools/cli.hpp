#pragma once

#include <ostream>

namespace glpd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point of the `glpd` tool; writes results to `out`, diagnostics to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Gradient checks on the differentiable primitives plus projection round trips.
/// Prints one line per check; returns true when all pass.
bool run_selftest(std::ostream& out);

}  // namespace glpd::cli
