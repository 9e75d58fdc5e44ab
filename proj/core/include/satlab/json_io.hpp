#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "satlab/gapnum.hpp"

namespace satlab {

// {"gap": "standard" | label, "offset": int}
nlohmann::json gap_to_json(const GapNumber& x, const GapUniverse& u);
GapNumber gap_from_json(const nlohmann::json& j, const GapUniverse& u);

// {"gaps": [...], "maps": {"half": {"g2": "g1"}}, "std_cap": 4}
nlohmann::json universe_to_json(const GapUniverse& u);
GapUniverse universe_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::string& path);

}  // namespace satlab
