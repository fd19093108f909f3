#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dampwave/config.hpp"

namespace dampwave {

enum ExitCode { kExitOk = 0, kExitNumerical = 1, kExitConfig = 2 };

// Each command writes its CSV files into cfg.output.dir and a short log to `log`.
// Config problems throw ConfigError, numerical ones any other Error.
void cmd_simulate(const RunConfig& cfg, std::ostream& log);
void cmd_freeze(const RunConfig& cfg, std::ostream& log);
void cmd_spectrum(const RunConfig& cfg, std::ostream& log);
void cmd_dispersion(const RunConfig& cfg, std::ostream& log);
void cmd_transfer(const RunConfig& cfg, std::ostream& log);
// Returns false when a check misses its threshold; report.csv lists them all.
bool cmd_firstorder_check(const RunConfig& cfg, std::ostream& log);

const std::vector<std::string>& command_names();

// Validates, dispatches and maps errors to exit codes; messages go to `err`.
int run_command(const std::string& name, const RunConfig& cfg, std::ostream& log, std::ostream& err);

}  // namespace dampwave
