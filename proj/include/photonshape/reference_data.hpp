#pragma once

#include <map>
#include <string>
#include <vector>

namespace photonshape {

// Atomic constants loaded from a JSON reference-data file (schema in
// docs/reference_data.md). Angular momenta are stored doubled.
struct ReferenceData {
  std::string atom;
  std::string line;
  std::string source;
  int two_I = 0;
  int two_J_ground = 0;
  int two_J_excited = 0;
  std::vector<int> ground_manifolds;       // F values, ascending
  std::vector<int> excited_manifolds;      // F' values included in the model, ascending
  std::map<int, double> excited_energy_mhz;  // F' -> energy (MHz), any reference
  int lambda_ground_F = 0;
  int lambda_ground_m = 0;
  int lambda_storage_F = 0;
  int lambda_storage_m = 0;
  int lambda_excited_m = 0;

  // Energy of F' relative to the lowest modelled excited manifold (MHz).
  double hyperfine_offset_mhz(int Fp) const;
};

ReferenceData parse_reference_data(const std::string& json_text, const std::string& origin);
ReferenceData load_reference_data(const std::string& path);

// PHOTONSHAPE_DATA_DIR environment variable, else the build-time data dir.
std::string default_reference_data_path();
const ReferenceData& default_reference_data();

}  // namespace photonshape
