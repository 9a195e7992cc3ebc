#pragma once

// Run configuration for the command-line tool: a flat key = value file with
// dotted keys, overridden by command-line flags.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cfc/mpc.hpp"
#include "cfc/scenarios.hpp"

namespace cfc {

enum class Command { kSimulate, kMpc, kBench, kValidate };

Command parse_command(const std::string& name);
const char* command_name(Command command);

struct RunConfig {
  Command command = Command::kSimulate;
  std::string scene = "sliding_cube";
  SceneParams scene_params;
  StepperKind stepper = StepperKind::kCfExtended;
  int steps = 500;
  std::vector<std::uint64_t> seeds{0};
  std::string out_dir = "out";

  TaskKind task = TaskKind::kRotation;
  MpcConfig mpc;

  std::vector<StepperKind> bench_steppers{StepperKind::kCf, StepperKind::kQp};
  int bench_repetitions = 3;

  void validate() const;
};

/// Ordered key/value pairs; later entries win.
using Overrides = std::vector<std::pair<std::string, std::string>>;

/// Parses "key = value" lines. Blank lines and '#' comments are skipped.
Overrides parse_config_text(const std::string& text, const std::string& origin = "<text>");

/// Reads and parses a config file; throws IoError when it cannot be read.
Overrides read_config_file(const std::string& path);

/// Splits "--key value" and "--key=value" tokens into overrides.
Overrides parse_flag_overrides(const std::vector<std::string>& args);

/// Applies overrides in order onto `base`. Unknown keys and malformed values
/// throw ConfigError naming the key.
RunConfig apply_overrides(RunConfig base, const Overrides& overrides);

/// Every accepted key with its expected value type.
std::map<std::string, std::string> config_keys();

/// "0,3,5" lists and "0-9" inclusive ranges, mixed freely.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace cfc
