#pragma once

#include <optional>
#include <string>
#include <vector>

#include "genesift/pipeline.hpp"

namespace genesift {

// Full run configuration addressable through flat `section.key = value`
// settings. Precedence: built-in defaults < GENESIFT_SEED < config file <
// --set overrides < dedicated flags (--seed last).
struct ResolvedConfig {
  PipelineConfig pipeline;
  std::optional<double> nan_replacement = 100.0;  // data.nan_replacement; unset = reject
};

// All known keys in print order.
std::vector<std::string> config_keys();

// Throws Usage for unknown keys, Config for bad values.
void apply_setting(ResolvedConfig& cfg, const std::string& key, const std::string& value);

std::string get_setting(const ResolvedConfig& cfg, const std::string& key);

// `key = value` lines with # comments.
void load_config_file(ResolvedConfig& cfg, const std::string& path);

// Applies GENESIFT_SEED (when set) to every section seed.
void apply_env_seed(ResolvedConfig& cfg);

// Sets every section seed to one value (the --seed flag).
void apply_global_seed(ResolvedConfig& cfg, std::uint64_t seed);

// Fully resolved `key = value` dump, one key per line, registry order.
std::string print_config(const ResolvedConfig& cfg);

}  // namespace genesift
