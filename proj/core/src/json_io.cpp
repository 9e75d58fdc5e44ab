#include "satlab/json_io.hpp"

#include <fstream>

#include "satlab/error.hpp"

namespace satlab {

nlohmann::json gap_to_json(const GapNumber& x, const GapUniverse& u) {
  return {{"gap", u.label(x.gap)}, {"offset", x.offset}};
}

GapNumber gap_from_json(const nlohmann::json& j, const GapUniverse& u) {
  if (j.is_string()) return u.parse(j.get<std::string>());
  if (j.is_number_integer()) return std_num(j.get<std::int64_t>());
  try {
    return u.num(j.at("gap").get<std::string>(), j.value("offset", std::int64_t{0}));
  } catch (const nlohmann::json::exception& e) {
    fail("json", std::string("malformed number: ") + e.what());
  }
}

nlohmann::json universe_to_json(const GapUniverse& u) {
  nlohmann::json j;
  j["gaps"] = u.labels();
  j["maps"] = u.map_spec();
  j["std_cap"] = u.std_cap();
  return j;
}

GapUniverse universe_from_json(const nlohmann::json& j) {
  try {
    auto labels = j.at("gaps").get<std::vector<std::string>>();
    GapUniverse::MapSpec maps;
    if (j.contains("maps")) maps = j.at("maps").get<GapUniverse::MapSpec>();
    return GapUniverse::make(labels, maps, j.value("std_cap", std::int64_t{4}));
  } catch (const nlohmann::json::exception& e) {
    fail("json", std::string("malformed universe: ") + e.what());
  }
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("io", "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail("json", path + ": " + e.what());
  }
}

}  // namespace satlab
