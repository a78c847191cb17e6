#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "mpk/models.hpp"

namespace mpk {

// Parses a model config object, e.g.
//   {"type":"cir","a":0.02,"kappa":0.2,"sigma":0.1}
// Matrices are row-major nested arrays. Unknown keys are rejected.
ModelSpec model_from_json(const nlohmann::json& j);
ModelSpec model_from_file(const std::string& path);

nlohmann::json model_to_json(const ModelSpec& spec);

}  // namespace mpk
