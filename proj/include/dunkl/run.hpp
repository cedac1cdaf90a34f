#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dunkl/scheme.hpp"

namespace dunkl {

enum class Command { simulate, converge, girsanov, moments, invariants };
const char* to_string(Command c) noexcept;
std::optional<Command> parse_command(const std::string& name);

/// Process exit statuses of a run.
enum ExitStatus : int {
  exit_ok = 0,
  exit_check_failed = 1,
  exit_schema = 2,
  exit_precondition = 3,
  exit_runtime = 4,
};

struct ModelConfig {
  std::string preset;       // empty when `custom` is set
  std::string custom;       // path of a root-system JSON file
  std::optional<int> d;
  double k = 1.0;
  std::optional<int> r;
  std::optional<Vector> x0;
  std::string drift = "none";  // none | heckman_opdam | constant
  Vector drift_value;          // for constant
};

struct McConfig {
  std::int64_t paths = 1000;
  std::vector<std::int64_t> n_values{16, 32, 64, 128, 256};
  std::int64_t n_ref = 4096;
  double p = 2.0;
  std::uint64_t seed = 0;
};

struct RunConfig {
  std::optional<Command> command;
  ModelConfig model;
  SchemeConfig scheme{Variant::semi_implicit, 1024, 1.0, EpsRule::scaled(2.0), 1e-12, 0.0};
  McConfig mc;
  std::int64_t simulate_paths = 1;
  std::optional<Vector> girsanov_nu;  // per positive root; default k - 1/2
  std::string girsanov_functional = "terminal_norm";
  std::vector<double> moment_q{0.0, 1.0, 2.0};
  std::int64_t invariant_points = 1000;
  std::string output = "out";
};

/// Parses a config document against the strict schema. Throws Error(schema) with a
/// field path (and a line number when `source` is given) on any violation.
RunConfig parse_run_config(const nlohmann::json& doc, const std::string& source = {});
/// Parses text; JSON syntax errors are reported with line and column.
RunConfig parse_run_config_text(const std::string& text);

struct RunOptions {
  std::optional<Command> command;
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  int threads = 0;  // 0 = available parallelism
};

struct RunOutcome {
  int exit_code = exit_ok;
  std::string message;
  std::vector<std::string> artifacts;
};

/// Loads the config file, resolves defaults, writes manifest.json and the command's
/// artifacts into the output directory. Never throws.
RunOutcome run(const std::string& config_path, const RunOptions& options = {});

}  // namespace dunkl
