#pragma once

#include <string>

#include "json.hpp"
#include "zson/trainer.hpp"
#include "zson/worldgen.hpp"

namespace zson {

// Strict JSON -> config parsing: unknown keys, wrong types, and bad values
// raise ConfigError with the offending field path. Missing keys keep their
// defaults, so partial configs are valid.

TrainerConfig trainer_config_from_json(const nlohmann::json& j);
nlohmann::json trainer_config_to_json(const TrainerConfig& cfg);
TrainerConfig load_trainer_config(const std::string& path);

WorldGenParams worldgen_params_from_json(const nlohmann::json& j);
nlohmann::json worldgen_params_to_json(const WorldGenParams& p);
WorldGenParams load_worldgen_params(const std::string& path);

}  // namespace zson
