#ifndef CHOOSIOW_CLI_COMMANDS_HPP
#define CHOOSIOW_CLI_COMMANDS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "choosiow/cli/market_file.hpp"
#include "choosiow/cli/report.hpp"

namespace choosiow::cli {

enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitSolver = 2, kExitCheck = 3 };

const std::vector<std::string>& subcommand_names();

struct CommandOptions {
  std::string command;
  std::string input;
  std::optional<std::string> population;  // second table of a CSV pair
  std::optional<std::string> output;
  double tolerance = 1e-10;
  int max_iterations = 200;
  std::uint64_t seed = 20240101;
  std::uint64_t samples = 100000;
  std::vector<std::string> shock_nu;  // LABEL=DELTA
  std::vector<std::string> shock_pi;  // ROW,COL=DELTA
  std::optional<GainsMode> gains_mode;
};

struct CommandResult {
  int exit_code = kExitOk;
  ReportFile report;
};

/// Runs one subcommand. Never throws for bad input or numerical failure; those
/// come back as an error block with a nonzero exit code.
CommandResult run_subcommand(const CommandOptions& options);

/// Plain-text tables summarising a report.
std::string summary_table(const ReportFile& report);

}  // namespace choosiow::cli

#endif  // CHOOSIOW_CLI_COMMANDS_HPP
