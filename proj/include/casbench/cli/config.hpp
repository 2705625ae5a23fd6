#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "casbench/agent/types.hpp"
#include "casbench/cas/session.hpp"

namespace casbench::cli {

struct ProviderSettings {
    std::string adapter = "anthropic";
    std::string endpoint = "https://api.anthropic.com";
    std::string key_env = "ANTHROPIC_API_KEY";
    std::string model;
};

struct HarnessConfig {
    cas::BackendDescriptor backend;
    ProviderSettings provider;
    std::filesystem::path packs_dir = "packs";
    std::filesystem::path results_dir = "results";
    agent::RunConfig defaults;
    int jobs = 1;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ValueKind { text, word_list, integer, optional_integer, number, optional_number, choice };

struct ConfigKey {
    std::string name;  // dotted, as in the config file
    ValueKind kind;
    std::vector<std::string> choices;  // for ValueKind::choice
    std::string help;
};

const std::vector<ConfigKey>& config_keys();

/// CASBENCH_ + upper-cased name with dots as underscores: run.max_turns -> CASBENCH_RUN_MAX_TURNS.
std::string env_var_for(const std::string& key);

enum class ConfigSource { defaults, file, environment, flag };

std::string_view to_string(ConfigSource source);

using ConfigValues = std::map<std::string, std::string>;

struct ResolvedValue {
    std::string value;
    ConfigSource source = ConfigSource::defaults;
};

/// Flattens a JSON object (nested objects become dotted keys). Unknown keys are errors.
ConfigValues parse_config_file(const std::string& text, const std::string& origin = "config");
ConfigValues load_config_file(const std::filesystem::path& path);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

ConfigValues environment_values(const EnvLookup& lookup);

/// "key=value" pairs from --set. Unknown keys are errors.
ConfigValues parse_assignments(const std::vector<std::string>& assignments);

/// flag > environment > file > built-in default, key by key.
std::map<std::string, ResolvedValue> merge_layers(const ConfigValues& file, const ConfigValues& env,
                                                  const ConfigValues& flags);

/// Throws ConfigError naming the key and where its value came from.
HarnessConfig build_config(const std::map<std::string, ResolvedValue>& values);

HarnessConfig resolve_config(const ConfigValues& file, const ConfigValues& env, const ConfigValues& flags);

/// Every key in canonical text form; build_config(config_values(c)) reproduces c.
ConfigValues config_values(const HarnessConfig& config);

}  // namespace casbench::cli
