#pragma once

#include <iosfwd>
#include <string>

#include "ptcure/config.hpp"

namespace ptcure {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2 };

struct CliOptions {
  std::string config_path;
  std::string out_dir = "out";
  ConfigOverrides overrides;
};

// Each command reads the config, does all computation, and only then creates
// out_dir and writes its files. Errors are reported on `err` and mapped to
// exit codes: validation and parse errors 1, numerical failures 2.
int cmd_fit(const CliOptions& opts, std::ostream& log, std::ostream& err);
int cmd_simulate(const CliOptions& opts, std::ostream& log, std::ostream& err);
int cmd_study(const CliOptions& opts, std::ostream& log, std::ostream& err);
// Recomputes diagnostics from exported chain files listed in diagnose.chains.
int cmd_diagnose(const CliOptions& opts, std::ostream& log, std::ostream& err);

int run_command(const std::string& command, const CliOptions& opts, std::ostream& log, std::ostream& err);

}  // namespace ptcure
