#pragma once

#include <json.hpp>

#include "rsdrl/mdp.hpp"

namespace rsdrl {

/// {"S","A","H","initial_state","P":[H][S][A][S],"r":[H][S][A]}
nlohmann::json mdp_to_json(const TabularMDP& mdp);

/// Parses and validates the MDP schema. Throws InputError on any violation.
TabularMDP mdp_from_json(const nlohmann::json& j);

/// Policy as a nested [H][S] action array.
nlohmann::json policy_to_json(const Policy& policy);

}  // namespace rsdrl
