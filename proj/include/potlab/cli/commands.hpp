#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "potlab/cli/config.hpp"
#include "potlab/cli/output.hpp"

namespace potlab {

/// Everything a command produces, before anything touches the disk.
struct CommandResult {
  std::vector<Artifact> artifacts;
  nlohmann::json report;
};

const std::vector<std::string>& command_names();

/// Runs a command in memory. The config is resolved in place (commands with a
/// natural domain of their own fill it in) so the echo reproduces the run.
CommandResult execute(const std::string& command, ExperimentConfig& config);

/// execute + write_outputs; returns the exit code (0 ok, 2 invalid input,
/// 3 solver failure) and prints diagnostics to err.
int run(const std::string& command, ExperimentConfig config, std::ostream& err);

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

/// Command-line entry point.
int cli_main(int argc, char** argv);

}  // namespace potlab
