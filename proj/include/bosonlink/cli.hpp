// cli.hpp — command-line front end: config parsing and validation, task
// dispatch, figure-ready CSV/JSON emission and the reproducibility manifest.

#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bosonlink/tasks.hpp"

namespace bosonlink::cli {

/// Exit codes: 0 success, 2 validation, 3 numerical non-convergence, 4 I/O.
enum ExitCode { kOk = 0, kValidation = 2, kNonConvergence = 3, kIo = 4 };

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    std::map<std::string, std::string> params;
    std::string output_dir = ".";
    int workers = 1;
    std::optional<int> trunc;   // per-mode truncation override; unset = auto policy
    double dt = 0.0;            // integrator step override; 0 = default
};

/// Parse a config document (key = value lines, '#' comments). Errors carry
/// line and column. Inline key=value arguments go through parse_pairs.
RunConfig parse_config(const std::string& text);
RunConfig parse_pairs(const std::vector<std::string>& pairs);

/// Domain validation: known command, known keys, physical parameter ranges.
/// Throws ConfigError naming the offending key.
void validate(const RunConfig& config);

/// Parsed value helpers (exposed for tests).
InputState parse_input_state(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);      // "5..17" or "5,8,11"
std::vector<double> parse_double_list(const std::string& text);
std::vector<Method> parse_methods(const std::string& text);    // "optimized,rwa"

/// FNV-1a over the canonicalized config; stable across runs.
std::string config_hash(const RunConfig& config);

struct RunResult {
    int exit_code = kOk;
    std::vector<std::string> outputs;  // files written, relative to output_dir
    nlohmann::json manifest;
};

/// Execute a validated config: writes per-command CSV/JSON artifacts into
/// config.output_dir and the manifest last (atomic rename).
RunResult run(const RunConfig& config);

/// Full entry point used by the binary: argv (without program name) to exit
/// code, diagnostics on stderr.
int main_entry(const std::vector<std::string>& args);

}  // namespace bosonlink::cli
