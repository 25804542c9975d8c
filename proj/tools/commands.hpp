#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "config.hpp"
#include "manifest.hpp"
#include "photonshape/photonshape.h"

namespace cli {

// A failed C API call, carrying its status.
struct ApiFailure : std::runtime_error {
  ps_status status;
  ApiFailure(ps_status s, const std::string& msg) : std::runtime_error(msg), status(s) {}
};

void check(ps_status s, const char* what);

template <typename T, void (*Free)(T*)>
struct Releaser {
  void operator()(T* p) const { Free(p); }
};

using Scheme = std::unique_ptr<ps_scheme, Releaser<ps_scheme, ps_scheme_free>>;
using Mode = std::unique_ptr<ps_mode, Releaser<ps_mode, ps_mode_free>>;
using Pulse = std::unique_ptr<ps_pulse, Releaser<ps_pulse, ps_pulse_free>>;
using Emission = std::unique_ptr<ps_emission, Releaser<ps_emission, ps_emission_free>>;
using Records = std::unique_ptr<ps_records, Releaser<ps_records, ps_records_free>>;
using Decomposition = std::unique_ptr<ps_decomposition, Releaser<ps_decomposition, ps_decomposition_free>>;

struct CommandOptions {
  bool no_compensation = false;
};

void cmd_sweep_efficiency(const ExperimentConfig& cfg, RunManifest& m);
void cmd_shape(const ExperimentConfig& cfg, const CommandOptions& opts, RunManifest& m);
void cmd_emit(const ExperimentConfig& cfg, RunManifest& m);
void cmd_select(const ExperimentConfig& cfg, RunManifest& m);
void cmd_convert(const ExperimentConfig& cfg, RunManifest& m);
void cmd_homodyne(const ExperimentConfig& cfg, RunManifest& m);
void cmd_budget(const ExperimentConfig& cfg, RunManifest& m);

}  // namespace cli
