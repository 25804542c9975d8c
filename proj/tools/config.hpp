#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "photonshape/photonshape.h"

namespace cli {

// Raised for schema violations; `path` is the JSON pointer of the offending field.
struct ConfigError : std::runtime_error {
  std::string path;
  ConfigError(std::string p, const std::string& msg) : std::runtime_error(msg), path(std::move(p)) {}
};

struct ShapeConfig {
  ps_shape_spec spec{};
};

struct SweepConfig {
  double from_mhz = -100.0;
  double to_mhz = 500.0;
  std::size_t points = 601;
  std::vector<ps_variant> variants{PS_ONE_LEVEL, PS_TWO_LEVEL, PS_THREE_LEVEL};
  double min_from_mhz = 5.0;
  double min_to_mhz = 150.0;
  std::vector<double> lindblad_checks_mhz;
  ps_variant check_variant = PS_TWO_LEVEL;
};

struct SelectConfig {
  std::size_t points = 72;
  double jump_time_us = 0.0;
};

struct ConvertConfig {
  ShapeConfig input;
  ShapeConfig output;
  bool validate = false;
  double validation_duration_us = 50.0;
  std::size_t validation_samples = 4000;
};

struct HomodyneConfig {
  std::size_t trials = 20000;
  std::size_t bins = 20;
  double t_start_us = -1.25;
  double t_end_us = 1.25;
  double p1 = 0.284;
  ps_generator generator = PS_GENERATOR_FOCK_MIXTURE;
  std::size_t vacuum_trials = 0;  // 0: shot-noise-normalized records, identity reference
  std::string source = "analytic";
  std::vector<std::string> pipelines{"compensated", "uncompensated"};
  double threshold = 0.0;
  bool write_records = false;
};

struct BudgetStageConfig {
  std::string name;
  double efficiency = 1.0;
  double uncertainty = 0.0;
};

struct BrightnessConfig {
  BudgetStageConfig p1;
  BudgetStageConfig detection;
  BudgetStageConfig preparation;
};

struct ExperimentConfig {
  ps_params params{4.9, 2.4, 0.3, 3.03};
  ps_variant variant = PS_THREE_LEVEL;
  ps_coupling coupling = PS_COUPLING_CLEBSCH_GORDAN;
  double delta_mhz = -20.0;
  std::optional<std::string> reference_data;
  ShapeConfig shape;
  ps_direction direction = PS_EMISSION;
  ps_pulse_options pulse{};
  ps_sim_options sim{};
  SweepConfig sweep;
  SelectConfig select;
  ConvertConfig convert;
  HomodyneConfig homodyne;
  std::uint64_t seed = 20240101;
  int threads = 1;
  std::string output_dir = "out";
  std::vector<BudgetStageConfig> budget;
  std::optional<BrightnessConfig> brightness;

  // Parsed document, echoed into the run manifest.
  nlohmann::ordered_json snapshot;

  const char* reference_path() const { return reference_data ? reference_data->c_str() : nullptr; }
};

// Quantity strings carry their unit: "4.9 MHz", "0.5 us", "180 deg".
double parse_frequency_mhz(const std::string& text);
double parse_time_us(const std::string& text);
double parse_angle_rad(const std::string& text);

ExperimentConfig parse_config(const nlohmann::ordered_json& doc);
ExperimentConfig load_config(const std::string& path);

const char* variant_name(ps_variant v);
const char* shape_family_name(ps_shape_family f);

}  // namespace cli
