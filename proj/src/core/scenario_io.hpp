#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "scenario.hpp"

namespace obslab {

/// Parse a scenario document. `base_dir` resolves relative matrix paths.
Scenario parse_scenario(const nlohmann::json& doc, const std::string& base_dir = "");

/// Load and validate a scenario file (SchemaError / AlignmentError on bad input).
Scenario load_scenario(const std::string& path);

nlohmann::json scenario_to_json(const Scenario& scenario);
nlohmann::json coefficient_to_json(const CoefficientField& coeff);
CoefficientField coefficient_from_json(const nlohmann::json& doc, const std::string& key);

}  // namespace obslab
