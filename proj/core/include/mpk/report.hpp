#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

namespace mpk {

// Serializes a report document with every float printed at 17 significant
// digits, object keys sorted; identical inputs give byte-identical output.
std::string dump_report(const nlohmann::json& j);

// standard envelope: {command, model, results, errors, versions}
nlohmann::json report_envelope(const std::string& command, const nlohmann::json& model,
                               const nlohmann::json& results, const nlohmann::json& errors);

}  // namespace mpk
