#pragma once

#include <string>
#include <vector>

#include "volterra/cli/config.hpp"
#include "volterra/cli/report.hpp"

namespace volterra::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUnexpected = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitNumerical = 4,
  kExitIo = 5,
};

int exit_code(ErrorCategory category);

/// Process names accepted in RunConfig::processes: P1, P2, P3, P3-ARMA21.
ProcessSpec process_by_name(const std::string& name, std::size_t length);

/// Directory holding death.csv and nile.csv: config.data_dir when set,
/// otherwise the directory configured at build time.
std::string resolve_data_dir(const RunConfig& config);

// Each command is pure: it computes a Report and writes nothing.
Report cmd_fit(const RunConfig& config);
Report cmd_select(const RunConfig& config);
Report cmd_kspa(const RunConfig& config);
Report cmd_simulate(const RunConfig& config);
/// config.target selects one of table1, table2, table3, figure1, figure2,
/// figure3 or all.
Report cmd_reproduce(const RunConfig& config);

/// Dispatches on config.command.
Report run_command(const RunConfig& config);

/// Full command-line entry point: parses arguments, runs the command, writes
/// `<out>/<command>.json` plus its CSV files, and returns the exit code.
/// Failures print a one-line diagnostic to stderr.
int run(int argc, const char* const* argv);

}  // namespace volterra::cli
