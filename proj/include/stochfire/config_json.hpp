#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "stochfire/ensemble.hpp"
#include "stochfire/sim.hpp"

namespace stochfire {

// Stable JSON keys for every SimConfig / EnsembleSpec field; unknown keys
// are rejected so typos cannot silently fall back to defaults.

nlohmann::json sim_config_to_json(const SimConfig& config);
SimConfig sim_config_from_json(const nlohmann::json& j);

nlohmann::json ensemble_spec_to_json(const EnsembleSpec& spec);
EnsembleSpec ensemble_spec_from_json(const nlohmann::json& j);

// Reads a JSON document that is either a bare SimConfig or a full
// EnsembleSpec ({"config": {...}, "n_sims": ..., "pad_to": ...}).
EnsembleSpec load_spec_file(const std::filesystem::path& path);

nlohmann::json parse_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace stochfire
