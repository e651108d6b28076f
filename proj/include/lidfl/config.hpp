#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lidfl/engine.hpp"

namespace lidfl {

/// Experiment file: `key = value` lines, `#` comments, list values written
/// `[a, b, c]`. Lists on a sweep key expand to a Cartesian grid.
///
/// Sweep keys: method, gamma, q, attack.kind, agg.kind, vote.byz_strategy,
/// seed. Every run of `repeat` > 1 expands into seeds seed, seed+1, ...
///
/// The full key list with defaults is printed by `lidfl keys` and listed in
/// config_keys().
struct ConfigEntry {
  std::string key;
  std::vector<std::string> values;
  bool is_list = false;
  std::size_t line = 0;
};

struct ExperimentFile {
  std::string source;
  std::vector<ConfigEntry> entries;

  [[nodiscard]] const ConfigEntry* find(std::string_view key) const;
  /// Replaces or appends an entry.
  void set(ConfigEntry entry);
};

struct ConfigKey {
  std::string name;
  std::string help;
  bool sweepable = false;
  /// Accepts a bracketed list as a single value (data.ratios).
  bool list_valued = false;
};

const std::vector<ConfigKey>& config_keys();

/// Syntax errors carry `source:line`.
ExperimentFile parse_experiment_text(std::string_view text, std::string source = "<text>");
ExperimentFile read_experiment_file(const std::string& path);

using EnvLookup = std::function<std::optional<std::string>(const std::string& name)>;

/// Overrides from environment variables named LIDFL_<KEY>, where the key is
/// upper-cased and dots become underscores (train.lr -> LIDFL_TRAIN_LR).
void apply_env_overrides(ExperimentFile& file, const EnvLookup& lookup);
EnvLookup process_env();

/// Expanded, validated run grid in a fixed order.
std::vector<RunConfig> expand(const ExperimentFile& file);

/// read_experiment_file + process environment overrides + expand.
std::vector<RunConfig> parse_config(const std::string& path);

/// Canonical text for one run; expand(parse_experiment_text(emit_config(c)))
/// yields exactly {c}.
std::string emit_config(const RunConfig& cfg);

/// Hex digest of the canonical text, excluding the execution policy.
std::string run_id(const RunConfig& cfg);

}  // namespace lidfl
