#pragma once

#include "squelchsim/engine.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace squelchsim {

class ConfigError : public Error {
public:
    using Error::Error;
};

// Config documents are JSON objects with the sections
// topology, scenario, protocol, metrics, output. Unknown keys are errors.
struct LoadedConfig {
    ScenarioConfig scenario;
    std::string output_dir;
    std::string config_hash;
};

// Fully resolved document (defaults filled in), without the output section.
nlohmann::json to_json(const ScenarioConfig& cfg);

ScenarioConfig scenario_from_json(const nlohmann::json& doc);

// "section.key=value"; value is parsed as JSON, falling back to a plain string.
void apply_override(nlohmann::json& doc, std::string_view assignment);

LoadedConfig load_config(const nlohmann::json& doc, const std::vector<std::string>& overrides = {});
LoadedConfig load_config_file(const std::string& path, const std::vector<std::string>& overrides = {});

// Hex SHA-256 of the canonical dump of to_json(cfg).
std::string config_hash(const ScenarioConfig& cfg);

std::string sha256_hex(std::string_view data);

}  // namespace squelchsim
