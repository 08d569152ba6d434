#pragma once
/*
scenario_io.hpp
---------------
Scenario documents (JSON) and the built-in presets.

Schema (every member required unless marked optional):

  {
    "name": "paper-canyon",
    "zones": {"r_repulsion": 1, "r_orientation": 6, "r_attraction": 14,
              "max_turn_rate": 0.7, "speed": 2, "tau": 0.1},
    "influence": {"alpha": 5, "K": 1, "B": 0.5},
    "influence_sign": 1,                       // optional, default 1
    "agent_count": 16,
    "spawn_region": {"min": [x, y, z], "max": [x, y, z]},
    "spawn_heading_mode": "random" | "aligned",
    "spawn_heading": [x, y, z],                // optional, default [1, 0, 0]
    "walls": [{"min": [..], "max": [..]}, ...],  // optional, default []
    "crossing": {"axis": "y", "beyond": 31, "direction": 1,
                 "span_min": [..], "span_max": [..]},   // optional
    "seed": 1,
    "max_ticks": 600
  }
*/

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "swarmsteer/errors.hpp"
#include "swarmsteer/scenario.hpp"

namespace swarmsteer {

nlohmann::json scenario_to_json(const Scenario& scenario);

// Validates structure and invariants; throws SchemaError naming the field.
Scenario scenario_from_json(const nlohmann::json& document);

// Parses JSON text then scenario_from_json.
Scenario load_scenario(std::string_view text);

std::string save_scenario(const Scenario& scenario);

// FNV-1a 64 over the canonical (compact, sorted-key) JSON form, as 16 hex digits.
std::string scenario_hash(const Scenario& scenario);

std::vector<std::string> preset_names();

// Throws SchemaError("name", ...) for unknown presets.
Scenario preset(std::string_view name);

// Preset name, or else a path to a scenario JSON file.
Scenario resolve_scenario(const std::string& name_or_path);

}  // namespace swarmsteer
