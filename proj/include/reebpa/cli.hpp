#pragma once

// Batch front end: one JSON config in, one JSON report out.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace reebpa {

inline constexpr const char* kReportSchema = "reebpa/1";

enum ExitCode : int { exit_pass = 0, exit_error = 1, exit_certified_fail = 2 };

struct CliResult {
  int exit_code = exit_pass;
  nlohmann::json report;
  std::string csv;  // growth tables only
};

/// FNV-1a of the canonical dump, ignoring keys that do not affect results
/// ("workers", "out", "csv").
std::string config_hash(const nlohmann::json& cfg);

/// Validates and runs one command. Throws ConfigError on schema violations.
CliResult dispatch(const nlohmann::json& cfg);

/// Full command line: flags, config loading, report writing, exit codes.
int run_cli(int argc, char** argv);

std::vector<std::string> command_names();

}  // namespace reebpa
