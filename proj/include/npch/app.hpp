#pragma once

// Command implementations shared by the CLI, the acceptance runner and the
// Python module.

#include <string>

#include "npch/io.hpp"
#include "npch/isometry.hpp"

namespace npch {

// Process exit codes.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

ReportBundle run_command(const RunConfig& cfg);

// Runs, writes reports into cfg.out and returns the exit code; errors are
// mapped to exit codes and described on stderr.
int execute(const RunConfig& cfg);
int exit_code_for(const std::exception& e);

SpaceDescriptor space_from_config(const RunConfig& cfg);
IsometryDescriptor twist_from_config(const RunConfig& cfg);
MetricTree default_tree();

}  // namespace npch
