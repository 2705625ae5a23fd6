#include "casbench/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "casbench/util/text.hpp"

namespace casbench::cli {

namespace {

using json = nlohmann::json;

struct KeyBinding {
    ConfigKey key;
    std::function<std::string(const HarnessConfig&)> get;
    std::function<void(HarnessConfig&, const std::string&)> set;
};

int parse_int(const std::string& text) {
    int value = 0;
    const auto trimmed = util::trim(text);
    const auto [end, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), value);
    if (ec != std::errc() || end != trimmed.data() + trimmed.size()) {
        throw std::invalid_argument("'" + text + "' is not an integer");
    }
    return value;
}

double parse_double(const std::string& text) {
    std::size_t used = 0;
    double value = 0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw std::invalid_argument("'" + text + "' is not a number");
    return value;
}

bool is_off(const std::string& text) {
    const auto lower = util::to_lower(util::trim(text));
    return lower.empty() || lower == "off" || lower == "none" || lower == "default";
}

std::string format_double(double value) {
    char buffer[64];
    const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, end);
}

std::string millis_as_seconds(std::chrono::milliseconds ms) {
    return format_double(static_cast<double>(ms.count()) / 1000.0);
}

std::chrono::milliseconds seconds_as_millis(const std::string& text) {
    return std::chrono::milliseconds(static_cast<long long>(parse_double(text) * 1000.0 + 0.5));
}

int parse_positive(const std::string& text) {
    const int value = parse_int(text);
    if (value < 1) throw std::invalid_argument("'" + text + "' must be at least 1");
    return value;
}

const std::vector<KeyBinding>& bindings() {
    static const std::vector<KeyBinding> table{
        {{"backend.name", ValueKind::text, {}, "label of the CAS backend"},
         [](const HarnessConfig& c) { return c.backend.name; },
         [](HarnessConfig& c, const std::string& v) { c.backend.name = v; }},
        {{"backend.command", ValueKind::word_list, {}, "command line launching the CAS, split on whitespace"},
         [](const HarnessConfig& c) { return util::join(c.backend.launch_command, " "); },
         [](HarnessConfig& c, const std::string& v) { c.backend.launch_command = util::split_whitespace(v); }},
        {{"backend.prompt", ValueKind::text, {}, "prompt printed by the CAS when it waits for input"},
         [](const HarnessConfig& c) { return c.backend.prompt_marker; },
         [](HarnessConfig& c, const std::string& v) { c.backend.prompt_marker = v; }},
        {{"backend.init", ValueKind::text, {}, "statements sent after start and after every restart"},
         [](const HarnessConfig& c) { return util::join(c.backend.init_statements, "\n"); },
         [](HarnessConfig& c, const std::string& v) {
             c.backend.init_statements.clear();
             for (const auto& line : util::split_lines(v)) {
                 if (!util::trim(line).empty()) c.backend.init_statements.emplace_back(util::trim(line));
             }
         }},
        {{"backend.timeout_s", ValueKind::number, {}, "per-statement timeout in seconds"},
         [](const HarnessConfig& c) { return millis_as_seconds(c.backend.statement_timeout); },
         [](HarnessConfig& c, const std::string& v) { c.backend.statement_timeout = seconds_as_millis(v); }},
        {{"backend.startup_timeout_s", ValueKind::number, {}, "time allowed for the first prompt"},
         [](const HarnessConfig& c) { return millis_as_seconds(c.backend.startup_timeout); },
         [](HarnessConfig& c, const std::string& v) { c.backend.startup_timeout = seconds_as_millis(v); }},
        {{"backend.quiescence_ms", ValueKind::integer, {}, "silence after a prompt before output counts as complete"},
         [](const HarnessConfig& c) { return std::to_string(c.backend.quiescence.count()); },
         [](HarnessConfig& c, const std::string& v) { c.backend.quiescence = std::chrono::milliseconds(parse_int(v)); }},
        {{"backend.output_limit", ValueKind::optional_integer, {}, "bytes kept per statement, or off"},
         [](const HarnessConfig& c) {
             return c.backend.output_byte_limit ? std::to_string(*c.backend.output_byte_limit) : std::string("off");
         },
         [](HarnessConfig& c, const std::string& v) {
             if (is_off(v)) {
                 c.backend.output_byte_limit.reset();
             } else {
                 c.backend.output_byte_limit = static_cast<std::size_t>(parse_positive(v));
             }
         }},
        {{"provider.adapter", ValueKind::choice, {"anthropic", "openai"}, "wire format of the chat API"},
         [](const HarnessConfig& c) { return c.provider.adapter; },
         [](HarnessConfig& c, const std::string& v) {
             if (v != "anthropic" && v != "openai") throw std::invalid_argument("unknown adapter '" + v + "'");
             c.provider.adapter = v;
         }},
        {{"provider.endpoint", ValueKind::text, {}, "base URL of the chat API"},
         [](const HarnessConfig& c) { return c.provider.endpoint; },
         [](HarnessConfig& c, const std::string& v) { c.provider.endpoint = v; }},
        {{"provider.key_env", ValueKind::text, {}, "environment variable holding the API key"},
         [](const HarnessConfig& c) { return c.provider.key_env; },
         [](HarnessConfig& c, const std::string& v) { c.provider.key_env = v; }},
        {{"provider.model", ValueKind::text, {}, "model identifier sent to the provider"},
         [](const HarnessConfig& c) { return c.provider.model; },
         [](HarnessConfig& c, const std::string& v) {
             c.provider.model = v;
             c.defaults.params.model_id = v;
         }},
        {{"packs_dir", ValueKind::text, {}, "directory of context packs"},
         [](const HarnessConfig& c) { return c.packs_dir.string(); },
         [](HarnessConfig& c, const std::string& v) { c.packs_dir = v; }},
        {{"results_dir", ValueKind::text, {}, "where transcripts, grades and reports go"},
         [](const HarnessConfig& c) { return c.results_dir.string(); },
         [](HarnessConfig& c, const std::string& v) { c.results_dir = v; }},
        {{"run.max_turns", ValueKind::integer, {}, "turn budget per run"},
         [](const HarnessConfig& c) { return std::to_string(c.defaults.max_turns); },
         [](HarnessConfig& c, const std::string& v) { c.defaults.max_turns = parse_int(v); }},
        {{"run.max_tokens", ValueKind::integer, {}, "visible output tokens per completion"},
         [](const HarnessConfig& c) { return std::to_string(c.defaults.params.max_tokens); },
         [](HarnessConfig& c, const std::string& v) { c.defaults.params.max_tokens = parse_int(v); }},
        {{"run.thinking_budget", ValueKind::optional_integer, {}, "thinking tokens per completion, or off"},
         [](const HarnessConfig& c) {
             return c.defaults.params.thinking_budget ? std::to_string(*c.defaults.params.thinking_budget)
                                                      : std::string("off");
         },
         [](HarnessConfig& c, const std::string& v) {
             if (is_off(v)) {
                 c.defaults.params.thinking_budget.reset();
             } else {
                 c.defaults.params.thinking_budget = parse_int(v);
             }
         }},
        {{"run.temperature", ValueKind::optional_number, {}, "sampling temperature, or default"},
         [](const HarnessConfig& c) {
             return c.defaults.params.temperature ? format_double(*c.defaults.params.temperature)
                                                  : std::string("default");
         },
         [](HarnessConfig& c, const std::string& v) {
             if (is_off(v)) {
                 c.defaults.params.temperature.reset();
             } else {
                 c.defaults.params.temperature = parse_double(v);
             }
         }},
        {{"run.extraction_mode", ValueKind::choice, {"verbatim", "fenced"}, "how statements are taken from replies"},
         [](const HarnessConfig& c) { return std::string(agent::to_string(c.defaults.extraction_mode)); },
         [](HarnessConfig& c, const std::string& v) {
             const auto mode = agent::extraction_mode_from_string(v);
             if (!mode) throw std::invalid_argument("unknown extraction mode '" + v + "'");
             c.defaults.extraction_mode = *mode;
         }},
        {{"run.attempt_limit", ValueKind::integer, {}, "fresh CAS sessions allowed per run"},
         [](const HarnessConfig& c) { return std::to_string(c.defaults.attempt_limit); },
         [](HarnessConfig& c, const std::string& v) { c.defaults.attempt_limit = parse_int(v); }},
        {{"jobs", ValueKind::integer, {}, "runs executed in parallel"},
         [](const HarnessConfig& c) { return std::to_string(c.jobs); },
         [](HarnessConfig& c, const std::string& v) { c.jobs = parse_positive(v); }},
    };
    return table;
}

const KeyBinding* find_binding(const std::string& name) {
    for (const auto& b : bindings()) {
        if (b.key.name == name) return &b;
    }
    return nullptr;
}

void flatten(const json& node, const std::string& prefix, ConfigValues& out, const std::string& origin) {
    for (const auto& [name, value] : node.items()) {
        const std::string key = prefix.empty() ? name : prefix + "." + name;
        if (value.is_object()) {
            flatten(value, key, out, origin);
            continue;
        }
        if (find_binding(key) == nullptr) throw ConfigError(origin + ": unknown key '" + key + "'");
        if (value.is_string()) {
            out[key] = value.get<std::string>();
        } else if (value.is_array()) {
            std::vector<std::string> parts;
            for (const auto& item : value) {
                parts.push_back(item.is_string() ? item.get<std::string>() : item.dump());
            }
            out[key] = util::join(parts, key == "backend.init" ? "\n" : " ");
        } else if (value.is_null()) {
            out[key] = "off";
        } else {
            out[key] = value.dump();
        }
    }
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> out;
        for (const auto& b : bindings()) out.push_back(b.key);
        return out;
    }();
    return keys;
}

std::string env_var_for(const std::string& key) {
    std::string name = "CASBENCH_";
    for (char c : key) name.push_back(c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    return name;
}

std::string_view to_string(ConfigSource source) {
    switch (source) {
        case ConfigSource::defaults: return "default";
        case ConfigSource::file: return "file";
        case ConfigSource::environment: return "env";
        case ConfigSource::flag: return "flag";
    }
    return "?";
}

ConfigValues parse_config_file(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    if (!root.is_object()) throw ConfigError(origin + ": top level must be an object");
    ConfigValues out;
    flatten(root, "", out, origin);
    return out;
}

ConfigValues load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_file(buffer.str(), path.string());
}

ConfigValues environment_values(const EnvLookup& lookup) {
    ConfigValues out;
    for (const auto& key : config_keys()) {
        if (auto value = lookup(env_var_for(key.name))) out[key.name] = *value;
    }
    return out;
}

ConfigValues parse_assignments(const std::vector<std::string>& assignments) {
    ConfigValues out;
    for (const auto& a : assignments) {
        const auto eq = a.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + a + "'");
        const std::string key(util::trim(a.substr(0, eq)));
        if (find_binding(key) == nullptr) throw ConfigError("unknown config key '" + key + "'");
        out[key] = a.substr(eq + 1);
    }
    return out;
}

std::map<std::string, ResolvedValue> merge_layers(const ConfigValues& file, const ConfigValues& env,
                                                  const ConfigValues& flags) {
    const HarnessConfig defaults;
    std::map<std::string, ResolvedValue> out;
    for (const auto& b : bindings()) {
        const auto& name = b.key.name;
        if (auto it = flags.find(name); it != flags.end()) {
            out[name] = {it->second, ConfigSource::flag};
        } else if (auto it = env.find(name); it != env.end()) {
            out[name] = {it->second, ConfigSource::environment};
        } else if (auto it = file.find(name); it != file.end()) {
            out[name] = {it->second, ConfigSource::file};
        } else {
            out[name] = {b.get(defaults), ConfigSource::defaults};
        }
    }
    return out;
}

HarnessConfig build_config(const std::map<std::string, ResolvedValue>& values) {
    HarnessConfig config;
    for (const auto& b : bindings()) {
        auto it = values.find(b.key.name);
        if (it == values.end()) continue;
        try {
            b.set(config, it->second.value);
        } catch (const std::exception& e) {
            throw ConfigError(b.key.name + " (from " + std::string(to_string(it->second.source)) + "): " + e.what());
        }
    }
    try {
        config.defaults.validate();
        config.backend.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return config;
}

HarnessConfig resolve_config(const ConfigValues& file, const ConfigValues& env, const ConfigValues& flags) {
    return build_config(merge_layers(file, env, flags));
}

ConfigValues config_values(const HarnessConfig& config) {
    ConfigValues out;
    for (const auto& b : bindings()) out[b.key.name] = b.get(config);
    return out;
}

}  // namespace casbench::cli
