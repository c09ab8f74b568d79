#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "slotcr/cli/scenario.hpp"

namespace slotcr::cli {

enum ExitCode : int { kSuccess = 0, kValidationFailure = 1, kConfigError = 2 };

const std::vector<std::string>& command_names();

/// Runs one subcommand, writing CSV to `out` and diagnostics to `err`.
int run(const std::string& command, const Scenario& scenario, std::ostream& out, std::ostream& err);

/// run() with CSV written to `output_path` ("-" or empty for stdout).
int run_to_path(const std::string& command, const Scenario& scenario, const std::string& output_path,
                std::ostream& err);

} // namespace slotcr::cli
