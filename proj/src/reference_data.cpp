#include "photonshape/reference_data.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>

#include "json.hpp"
#include "photonshape/error.hpp"

namespace photonshape {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& origin, const std::string& what) {
  fail(ErrorCode::Configuration, "reference data " + origin + ": " + what);
}

// Accepts 1, 1.5, "3/2" or "1"; returns the doubled value.
int parse_doubled(const json& v, const std::string& origin, const std::string& field) {
  double value = 0.0;
  if (v.is_number()) {
    value = v.get<double>();
  } else if (v.is_string()) {
    const std::string s = v.get<std::string>();
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) {
        value = std::stod(s);
      } else {
        value = std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
      }
    } catch (const std::exception&) {
      config_error(origin, "field '" + field + "' is not a number: " + s);
    }
  } else {
    config_error(origin, "field '" + field + "' must be a number or fraction string");
  }
  const double twice = 2.0 * value;
  if (std::abs(twice - std::round(twice)) > 1e-12 || twice < 0.0) {
    config_error(origin, "field '" + field + "' is not a non-negative half-integer");
  }
  return static_cast<int>(std::lround(twice));
}

const json& member(const json& j, const char* key, const std::string& origin) {
  if (!j.is_object() || !j.contains(key)) config_error(origin, std::string("missing '") + key + "'");
  return j.at(key);
}

std::vector<int> int_list(const json& j, const std::string& origin, const std::string& field) {
  if (!j.is_array() || j.empty()) config_error(origin, "'" + field + "' must be a non-empty array");
  std::vector<int> out;
  for (const auto& e : j) {
    if (!e.is_number_integer()) config_error(origin, "'" + field + "' entries must be integers");
    out.push_back(e.get<int>());
  }
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] <= out[i - 1]) config_error(origin, "'" + field + "' must be strictly increasing");
  }
  return out;
}

}  // namespace

double ReferenceData::hyperfine_offset_mhz(int Fp) const {
  const auto it = excited_energy_mhz.find(Fp);
  if (it == excited_energy_mhz.end() || excited_manifolds.empty()) {
    fail(ErrorCode::Configuration, "no hyperfine energy for F'=" + std::to_string(Fp));
  }
  return it->second - excited_energy_mhz.at(excited_manifolds.front());
}

ReferenceData parse_reference_data(const std::string& json_text, const std::string& origin) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error(origin, std::string("malformed JSON: ") + e.what());
  }
  ReferenceData d;
  d.atom = member(j, "atom", origin).get<std::string>();
  d.line = member(j, "line", origin).get<std::string>();
  d.source = j.value("source", "");
  d.two_I = parse_doubled(member(j, "nuclear_spin", origin), origin, "nuclear_spin");

  const json& ground = member(j, "ground", origin);
  d.two_J_ground = parse_doubled(member(ground, "J", origin), origin, "ground.J");
  d.ground_manifolds = int_list(member(ground, "manifolds", origin), origin, "ground.manifolds");

  const json& excited = member(j, "excited", origin);
  d.two_J_excited = parse_doubled(member(excited, "J", origin), origin, "excited.J");
  d.excited_manifolds =
      int_list(member(excited, "manifolds", origin), origin, "excited.manifolds");
  const json& energies = member(excited, "energy_mhz", origin);
  if (!energies.is_object()) config_error(origin, "'excited.energy_mhz' must be an object");
  for (const auto& [key, value] : energies.items()) {
    if (!value.is_number()) config_error(origin, "energy for F'=" + key + " must be a number");
    d.excited_energy_mhz[std::stoi(key)] = value.get<double>();
  }
  for (int Fp : d.excited_manifolds) {
    if (!d.excited_energy_mhz.count(Fp)) {
      config_error(origin, "missing energy for modelled manifold F'=" + std::to_string(Fp));
    }
  }
  for (std::size_t i = 1; i < d.excited_manifolds.size(); ++i) {
    if (d.excited_energy_mhz[d.excited_manifolds[i]] <=
        d.excited_energy_mhz[d.excited_manifolds[i - 1]]) {
      config_error(origin, "hyperfine offsets must increase with F'");
    }
  }

  const json& lambda = member(j, "lambda", origin);
  const json& lg = member(lambda, "ground", origin);
  const json& ls = member(lambda, "storage", origin);
  d.lambda_ground_F = member(lg, "F", origin).get<int>();
  d.lambda_ground_m = member(lg, "m", origin).get<int>();
  d.lambda_storage_F = member(ls, "F", origin).get<int>();
  d.lambda_storage_m = member(ls, "m", origin).get<int>();
  d.lambda_excited_m = member(lambda, "excited_m", origin).get<int>();
  return d;
}

ReferenceData load_reference_data(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Configuration, "cannot open reference data file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_reference_data(text.str(), path);
}

std::string default_reference_data_path() {
  if (const char* dir = std::getenv("PHOTONSHAPE_DATA_DIR"); dir && *dir) {
    return std::string(dir) + "/rb87_d2.json";
  }
  return std::string(PHOTONSHAPE_DATA_DIR) + "/rb87_d2.json";
}

const ReferenceData& default_reference_data() {
  static std::once_flag once;
  static ReferenceData data;
  std::call_once(once, [] { data = load_reference_data(default_reference_data_path()); });
  return data;
}

}  // namespace photonshape
