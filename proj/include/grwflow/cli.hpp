#pragma once

// Configuration files, run orchestration and output writers behind the
// command-line tool.

#include "grwflow/flow.hpp"
#include "grwflow/verify.hpp"

#include "json.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace grwflow::cli {

inline constexpr const char *kToolVersion = "0.3.1";
inline constexpr const char *kTraceHeader = "# grwflow trace v1";

struct OutputConfig {
  std::string dir = "out";
  bool csv = true;
  bool report = true;
};

struct RunConfig {
  flow::FlowConfig flow;
  verify::MonitorOptions checks;
  OutputConfig output;
  nlohmann::json echo; // every key with its materialized default
  std::string source;  // path the config came from, if any
};

/// Parses and validates a JSON config. Unknown keys are errors naming the
/// nearest valid key; the initial data is checked on the grid.
RunConfig parse_config(const std::string &path);
RunConfig parse_config_json(const nlohmann::json &j, const std::string &source = "<memory>");

/// Edit distance used for "did you mean" hints.
std::size_t levenshtein(const std::string &a, const std::string &b);
std::string nearest(const std::string &key, const std::vector<std::string> &candidates);

enum ExitCode { kPass = 0, kCheckFailure = 1, kRuntimeError = 2 };

struct RunResult {
  int exit_code = kRuntimeError;
  std::string verdict; // pass | fail | error
  std::string message;
  std::filesystem::path out_dir;
  std::vector<std::filesystem::path> files;
};

/// Runs one config and writes trace.csv, report.json and manifest.json (and
/// residuals.csv / simons.csv / boundary.csv when enabled; snapshot.csv on
/// breakdown) into out_dir. Diagnostics go to `err`.
RunResult run(const RunConfig &cfg, const std::filesystem::path &out_dir, std::ostream &err);

/// Hypothesis report and theorem constants for a config, as key=value lines.
int check(const RunConfig &cfg, std::ostream &out, std::ostream &err);

/// Expands a glob pattern into config paths (sorted).
std::vector<std::string> expand_glob(const std::string &pattern);

/// Runs every config concurrently (at most `jobs` at a time) into
/// base/<config stem>/ and writes base/index.json.
int sweep(const std::vector<std::string> &configs, const std::filesystem::path &base,
          unsigned jobs, std::ostream &err);

/// Output directory precedence: explicit flag, then GRWFLOW_OUT_DIR, then the config.
std::filesystem::path resolve_out_dir(const std::string &flag, const RunConfig &cfg);

/// Shortest round-trip text for a double; empty for NaN.
std::string format_double(double v);

} // namespace grwflow::cli
