#pragma once

#include <exception>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "critgrowth/config.hpp"
#include "critgrowth/spectral.hpp"

namespace critgrowth {

struct CommandOutput {
  std::string command;
  /// written as <command>.json
  nlohmann::json report;
  /// (file name, contents) pairs
  std::vector<std::pair<std::string, std::string>> tables;
};

CommandOutput cmd_analyze(const RunConfig& cfg);
CommandOutput cmd_simulate(const RunConfig& cfg);
CommandOutput cmd_lyapunov(const RunConfig& cfg);
CommandOutput cmd_audit(const RunConfig& cfg);

/// Dispatches on "analyze" | "simulate" | "lyapunov" | "audit".
CommandOutput run_command(const std::string& name, const RunConfig& cfg);

/// Writes the report and tables under cfg.output.dir according to the
/// format. Returns the paths written.
std::vector<std::string> write_outputs(const CommandOutput& out, const OutputSettings& settings);

/// JSON dump used for every report file (2-space indent, trailing newline).
std::string dump_report(const nlohmann::json& j);

/// Start state: cfg.x0 if given, else round(100 v).
State resolve_x0(const RunConfig& cfg, const PerronData& pd);

/// Machine-readable error body and the exit code for an exception.
nlohmann::json error_json(const std::exception& e);
int exit_code_for(const std::exception& e);

}  // namespace critgrowth
