#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "json.hpp"
#include "kt/error.hpp"
#include "kt/theories.hpp"

namespace kt {

std::string data_dir() {
  if (const char* env = std::getenv("KT_DATA_DIR")) return env;
  return KT_DATA_DIR;
}

GoldenReport golden(const std::string& name) {
  const auto& names = builtin_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) throw SpecError("unknown theory '" + name + "'");
  const std::string path = data_dir() + "/golden/" + name + ".json";
  std::ifstream in(path);
  if (!in) throw SpecError("cannot read golden report '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SpecError("malformed golden report '" + path + "': " + e.what());
  }
  GoldenReport g;
  try {
    g.theory = j.at("theory").get<std::string>();
    g.el = j.at("el").get<std::map<std::string, std::string>>();
    g.alpha = j.at("alpha").get<std::string>();
    g.alpha_boundary = j.at("alpha_boundary").get<std::string>();
    g.omega = j.at("omega").get<std::string>();
    g.omega_boundary = j.at("omega_boundary").get<std::string>();
    g.constraints = j.at("constraints").get<std::map<std::string, std::string>>();
    g.integers = j.at("integers").get<std::map<std::string, long>>();
    for (const auto& [k, v] : j.at("targets").items()) {
      GoldenTarget t;
      t.value = v.at("value").get<double>();
      t.tol = v.value("tol", 0.0);
      t.compare = v.value("compare", std::string("abs"));
      if (t.compare != "abs" && t.compare != "max" && t.compare != "min") throw SpecError("unknown comparison '" + t.compare + "'");
      g.targets[k] = t;
    }
    g.origin = j.at("origin").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw SpecError("malformed golden report '" + path + "': " + e.what());
  }
  if (g.theory != name) throw SpecError("golden report '" + path + "' names theory '" + g.theory + "'");
  return g;
}

}  // namespace kt
