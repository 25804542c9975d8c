#include "config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

namespace cli {

namespace {

using json = nlohmann::ordered_json;

struct UnitScale {
  std::string_view unit;
  double scale;
};

double parse_quantity(const std::string& text, std::initializer_list<UnitScale> units, const char* kind) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin || !std::isfinite(value)) {
    throw ConfigError("", "cannot read a number from '" + text + "'");
  }
  std::string_view unit(end);
  while (!unit.empty() && unit.front() == ' ') unit.remove_prefix(1);
  while (!unit.empty() && unit.back() == ' ') unit.remove_suffix(1);
  if (unit.empty()) throw ConfigError("", std::string("'") + text + "' has no " + kind + " unit");
  for (const auto& u : units) {
    if (unit == u.unit) return value * u.scale;
  }
  throw ConfigError("", "unknown " + std::string(kind) + " unit '" + std::string(unit) + "'");
}

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }

void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ConfigError(child(path, key), "unknown field");
  }
}

template <typename F>
auto with_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (ConfigError& e) {
    if (e.path.empty()) e.path = path;
    throw;
  }
}

double quantity(const json& obj, const std::string& path, const char* key, double (*parse)(const std::string&)) {
  const std::string p = child(path, key);
  const json& v = obj.at(key);
  if (v.is_number()) throw ConfigError(p, "bare number; this field needs an explicit unit, e.g. \"4.9 MHz\"");
  if (!v.is_string()) throw ConfigError(p, "expected a quantity string");
  return with_path(p, [&] { return parse(v.get<std::string>()); });
}

double number(const json& obj, const std::string& path, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(child(path, key), "expected a dimensionless number");
  return v.get<double>();
}

std::size_t count(const json& obj, const std::string& path, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(child(path, key), "expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

bool flag(const json& obj, const std::string& path, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(child(path, key), "expected true or false");
  return v.get<bool>();
}

std::string text(const json& obj, const std::string& path, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(child(path, key), "expected a string");
  return v.get<std::string>();
}

template <typename E>
E choice(const json& obj, const std::string& path, const char* key,
         std::initializer_list<std::pair<std::string_view, E>> options) {
  const std::string s = text(obj, path, key);
  for (const auto& [name, value] : options) {
    if (s == name) return value;
  }
  std::string list;
  for (const auto& [name, value] : options) list += (list.empty() ? "" : ", ") + std::string(name);
  throw ConfigError(child(path, key), "'" + s + "' is not one of: " + list);
}

ps_variant parse_variant(const json& obj, const std::string& path, const char* key) {
  return choice<ps_variant>(obj, path, key,
                            {{"one-level", PS_ONE_LEVEL}, {"two-level", PS_TWO_LEVEL}, {"three-level", PS_THREE_LEVEL}});
}

void parse_window(const json& obj, const std::string& path, double& from, double& to) {
  check_keys(obj, path, {"from", "to"});
  from = quantity(obj, path, "from", parse_time_us);
  to = quantity(obj, path, "to", parse_time_us);
  if (!(to > from)) throw ConfigError(path, "window end must follow its start");
}

ShapeConfig parse_shape(const json& obj, const std::string& path, ShapeConfig base) {
  check_keys(obj, path, {"family", "duration", "window", "samples", "phase_jump"});
  ps_shape_spec& s = base.spec;
  if (obj.contains("family")) {
    s.family = choice<ps_shape_family>(obj, path, "family",
                                       {{"sech", PS_SHAPE_SECH}, {"gaussian", PS_SHAPE_GAUSSIAN}, {"square", PS_SHAPE_SQUARE}});
  }
  if (obj.contains("duration")) {
    s.characteristic_us = quantity(obj, path, "duration", parse_time_us);
    if (!(s.characteristic_us > 0.0)) throw ConfigError(child(path, "duration"), "must be positive");
    if (s.family == PS_SHAPE_SQUARE) {
      s.t_min_us = -0.25 * s.characteristic_us;
      s.t_max_us = 1.25 * s.characteristic_us;
    } else {
      s.t_min_us = -5.0 * s.characteristic_us;
      s.t_max_us = 5.0 * s.characteristic_us;
    }
  }
  if (obj.contains("window")) parse_window(obj.at("window"), child(path, "window"), s.t_min_us, s.t_max_us);
  if (obj.contains("samples")) s.n_samples = count(obj, path, "samples");
  if (obj.contains("phase_jump")) {
    const std::string p = child(path, "phase_jump");
    const json& j = obj.at("phase_jump");
    check_keys(j, p, {"time", "phase"});
    s.has_phase_jump = 1;
    s.jump_time_us = quantity(j, p, "time", parse_time_us);
    s.jump_phase_rad = quantity(j, p, "phase", parse_angle_rad);
  }
  return base;
}

BudgetStageConfig parse_stage(const json& obj, const std::string& path, bool named) {
  if (named) {
    check_keys(obj, path, {"name", "efficiency", "uncertainty"});
  } else {
    check_keys(obj, path, {"value", "uncertainty"});
  }
  BudgetStageConfig s;
  if (named) s.name = text(obj, path, "name");
  s.efficiency = number(obj, path, named ? "efficiency" : "value");
  if (obj.contains("uncertainty")) s.uncertainty = number(obj, path, "uncertainty");
  if (named && !(s.efficiency >= 0.0 && s.efficiency <= 1.0)) {
    throw ConfigError(child(path, "efficiency"), "stage efficiency must lie in [0, 1]");
  }
  if (s.uncertainty < 0.0) throw ConfigError(child(path, "uncertainty"), "must be non-negative");
  return s;
}

ShapeConfig default_shape(double duration_us) {
  ShapeConfig c;
  ps_shape_spec_default(&c.spec);
  c.spec.characteristic_us = duration_us;
  c.spec.t_min_us = -5.0 * duration_us;
  c.spec.t_max_us = 5.0 * duration_us;
  return c;
}

}  // namespace

double parse_frequency_mhz(const std::string& s) {
  return parse_quantity(s, {{"Hz", 1e-6}, {"kHz", 1e-3}, {"MHz", 1.0}, {"GHz", 1e3}}, "frequency");
}

double parse_time_us(const std::string& s) {
  return parse_quantity(s, {{"s", 1e6}, {"ms", 1e3}, {"us", 1.0}, {"µs", 1.0}, {"ns", 1e-3}}, "time");
}

double parse_angle_rad(const std::string& s) {
  return parse_quantity(s, {{"rad", 1.0}, {"mrad", 1e-3}, {"deg", M_PI / 180.0}, {"pi", M_PI}}, "angle");
}

const char* variant_name(ps_variant v) {
  switch (v) {
    case PS_ONE_LEVEL:
      return "one-level";
    case PS_TWO_LEVEL:
      return "two-level";
    case PS_THREE_LEVEL:
      return "three-level";
  }
  return "unknown";
}

const char* shape_family_name(ps_shape_family f) {
  switch (f) {
    case PS_SHAPE_SECH:
      return "sech";
    case PS_SHAPE_GAUSSIAN:
      return "gaussian";
    case PS_SHAPE_SQUARE:
      return "square";
  }
  return "unknown";
}

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig c;
  ps_pulse_options_default(&c.pulse);
  ps_sim_options_default(&c.sim);
  c.shape = default_shape(0.5);
  c.convert.input = default_shape(0.5);
  c.convert.output = default_shape(500.0);
  c.snapshot = doc;

  const std::string root;
  check_keys(doc, root, {"cqed", "model", "shape", "pulse", "simulation", "sweep", "select", "convert", "homodyne",
                         "budget", "run"});

  if (doc.contains("cqed")) {
    const std::string p = "/cqed";
    const json& j = doc.at("cqed");
    check_keys(j, p, {"g", "kappa_c", "kappa_l", "gamma"});
    if (j.contains("g")) c.params.g_mhz = quantity(j, p, "g", parse_frequency_mhz);
    if (j.contains("kappa_c")) c.params.kappa_c_mhz = quantity(j, p, "kappa_c", parse_frequency_mhz);
    if (j.contains("kappa_l")) c.params.kappa_l_mhz = quantity(j, p, "kappa_l", parse_frequency_mhz);
    if (j.contains("gamma")) c.params.gamma_mhz = quantity(j, p, "gamma", parse_frequency_mhz);
  }

  if (doc.contains("model")) {
    const std::string p = "/model";
    const json& j = doc.at("model");
    check_keys(j, p, {"variant", "coupling", "detuning", "reference_data"});
    if (j.contains("variant")) c.variant = parse_variant(j, p, "variant");
    if (j.contains("coupling")) {
      c.coupling = choice<ps_coupling>(j, p, "coupling",
                                       {{"clebsch-gordan", PS_COUPLING_CLEBSCH_GORDAN}, {"unit", PS_COUPLING_UNIT}});
    }
    if (j.contains("detuning")) c.delta_mhz = quantity(j, p, "detuning", parse_frequency_mhz);
    if (j.contains("reference_data")) c.reference_data = text(j, p, "reference_data");
  }

  if (doc.contains("shape")) c.shape = parse_shape(doc.at("shape"), "/shape", c.shape);

  if (doc.contains("pulse")) {
    const std::string p = "/pulse";
    const json& j = doc.at("pulse");
    check_keys(j, p, {"direction", "compensation", "omega_max", "tail_epsilon"});
    if (j.contains("direction")) {
      c.direction = choice<ps_direction>(j, p, "direction", {{"emission", PS_EMISSION}, {"storage", PS_STORAGE}});
    }
    if (j.contains("compensation")) c.pulse.compensate_phase = flag(j, p, "compensation") ? 1 : 0;
    if (j.contains("omega_max")) c.pulse.omega_max_mhz = quantity(j, p, "omega_max", parse_frequency_mhz);
    if (j.contains("tail_epsilon")) c.pulse.tail_epsilon = number(j, p, "tail_epsilon");
  }

  if (doc.contains("simulation")) {
    const std::string p = "/simulation";
    const json& j = doc.at("simulation");
    check_keys(j, p, {"integrator", "step_bound", "tail", "rtol", "atol"});
    if (j.contains("integrator")) {
      c.sim.integrator = choice<ps_integrator>(j, p, "integrator", {{"rk4", PS_RK4}, {"adaptive", PS_ADAPTIVE}});
    }
    if (j.contains("step_bound")) c.sim.step_bound = number(j, p, "step_bound");
    if (j.contains("tail")) c.sim.tail_us = quantity(j, p, "tail", parse_time_us);
    if (j.contains("rtol")) c.sim.rtol = number(j, p, "rtol");
    if (j.contains("atol")) c.sim.atol = number(j, p, "atol");
  }

  if (doc.contains("sweep")) {
    const std::string p = "/sweep";
    const json& j = doc.at("sweep");
    check_keys(j, p, {"from", "to", "points", "variants", "minimum_window", "lindblad_checks", "check_variant"});
    if (j.contains("from")) c.sweep.from_mhz = quantity(j, p, "from", parse_frequency_mhz);
    if (j.contains("to")) c.sweep.to_mhz = quantity(j, p, "to", parse_frequency_mhz);
    if (j.contains("points")) c.sweep.points = count(j, p, "points");
    if (j.contains("variants")) {
      const json& v = j.at("variants");
      if (!v.is_array() || v.empty()) throw ConfigError(child(p, "variants"), "expected a non-empty list");
      c.sweep.variants.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        const json wrap = {{"v", v[i]}};
        c.sweep.variants.push_back(parse_variant(wrap, child(p, "variants/" + std::to_string(i)), "v"));
      }
    }
    if (j.contains("minimum_window")) {
      const std::string pw = child(p, "minimum_window");
      const json& w = j.at("minimum_window");
      check_keys(w, pw, {"from", "to"});
      c.sweep.min_from_mhz = quantity(w, pw, "from", parse_frequency_mhz);
      c.sweep.min_to_mhz = quantity(w, pw, "to", parse_frequency_mhz);
    }
    if (j.contains("lindblad_checks")) {
      const json& v = j.at("lindblad_checks");
      if (!v.is_array()) throw ConfigError(child(p, "lindblad_checks"), "expected a list of detunings");
      for (std::size_t i = 0; i < v.size(); ++i) {
        const json wrap = {{"d", v[i]}};
        c.sweep.lindblad_checks_mhz.push_back(
            quantity(wrap, child(p, "lindblad_checks/" + std::to_string(i)), "d", parse_frequency_mhz));
      }
    }
    if (j.contains("check_variant")) c.sweep.check_variant = parse_variant(j, p, "check_variant");
    if (!(c.sweep.to_mhz > c.sweep.from_mhz)) throw ConfigError(p, "sweep range is empty");
    if (c.sweep.points < 2) throw ConfigError(child(p, "points"), "need at least two points");
  }

  if (doc.contains("select")) {
    const std::string p = "/select";
    const json& j = doc.at("select");
    check_keys(j, p, {"points", "jump_time"});
    if (j.contains("points")) c.select.points = count(j, p, "points");
    if (j.contains("jump_time")) c.select.jump_time_us = quantity(j, p, "jump_time", parse_time_us);
  }

  if (doc.contains("convert")) {
    const std::string p = "/convert";
    const json& j = doc.at("convert");
    check_keys(j, p, {"input", "output", "validation"});
    if (j.contains("input")) c.convert.input = parse_shape(j.at("input"), child(p, "input"), c.convert.input);
    if (j.contains("output")) c.convert.output = parse_shape(j.at("output"), child(p, "output"), c.convert.output);
    if (j.contains("validation")) {
      const std::string pv = child(p, "validation");
      const json& v = j.at("validation");
      check_keys(v, pv, {"enabled", "output_duration", "samples"});
      if (v.contains("enabled")) c.convert.validate = flag(v, pv, "enabled");
      if (v.contains("output_duration")) {
        c.convert.validation_duration_us = quantity(v, pv, "output_duration", parse_time_us);
      }
      if (v.contains("samples")) c.convert.validation_samples = count(v, pv, "samples");
    }
  }

  if (doc.contains("homodyne")) {
    const std::string p = "/homodyne";
    const json& j = doc.at("homodyne");
    check_keys(j, p, {"trials", "bins", "window", "p1", "generator", "vacuum_trials", "source", "pipelines",
                      "threshold", "write_records"});
    HomodyneConfig& h = c.homodyne;
    if (j.contains("trials")) h.trials = count(j, p, "trials");
    if (j.contains("bins")) h.bins = count(j, p, "bins");
    if (j.contains("window")) parse_window(j.at("window"), child(p, "window"), h.t_start_us, h.t_end_us);
    if (j.contains("p1")) h.p1 = number(j, p, "p1");
    if (j.contains("generator")) {
      h.generator = choice<ps_generator>(j, p, "generator",
                                         {{"gaussian", PS_GENERATOR_GAUSSIAN}, {"fock-mixture", PS_GENERATOR_FOCK_MIXTURE}});
    }
    if (j.contains("vacuum_trials")) h.vacuum_trials = count(j, p, "vacuum_trials");
    if (j.contains("source")) {
      h.source = choice<std::string>(j, p, "source",
                                     {{"analytic", "analytic"}, {"lindblad", "lindblad"}});
    }
    if (j.contains("pipelines")) {
      const json& v = j.at("pipelines");
      if (!v.is_array() || v.empty()) throw ConfigError(child(p, "pipelines"), "expected a non-empty list");
      h.pipelines.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        const json wrap = {{"v", v[i]}};
        h.pipelines.push_back(choice<std::string>(wrap, child(p, "pipelines/" + std::to_string(i)), "v",
                                                  {{"compensated", "compensated"}, {"uncompensated", "uncompensated"}}));
      }
    }
    if (j.contains("threshold")) h.threshold = number(j, p, "threshold");
    if (j.contains("write_records")) h.write_records = flag(j, p, "write_records");
    if (h.bins < 2) throw ConfigError(child(p, "bins"), "need at least two bins");
    if (h.trials < 2) throw ConfigError(child(p, "trials"), "need at least two trials");
    if (!(h.p1 >= 0.0 && h.p1 <= 1.0)) throw ConfigError(child(p, "p1"), "must lie in [0, 1]");
  }

  if (doc.contains("budget")) {
    const std::string p = "/budget";
    const json& j = doc.at("budget");
    check_keys(j, p, {"stages", "brightness"});
    if (j.contains("stages")) {
      const json& v = j.at("stages");
      if (!v.is_array()) throw ConfigError(child(p, "stages"), "expected a list of stages");
      for (std::size_t i = 0; i < v.size(); ++i) {
        c.budget.push_back(parse_stage(v[i], child(p, "stages/" + std::to_string(i)), true));
      }
    }
    if (j.contains("brightness")) {
      const std::string pb = child(p, "brightness");
      const json& b = j.at("brightness");
      check_keys(b, pb, {"p1", "detection", "preparation"});
      BrightnessConfig br;
      br.p1 = parse_stage(b.at("p1"), child(pb, "p1"), false);
      br.detection = parse_stage(b.at("detection"), child(pb, "detection"), false);
      br.preparation = parse_stage(b.at("preparation"), child(pb, "preparation"), false);
      br.p1.name = "p1";
      br.detection.name = "detection";
      br.preparation.name = "preparation";
      c.brightness = br;
    }
  }

  if (doc.contains("run")) {
    const std::string p = "/run";
    const json& j = doc.at("run");
    check_keys(j, p, {"seed", "threads", "output"});
    if (j.contains("seed")) {
      if (!j.at("seed").is_number_unsigned()) throw ConfigError(child(p, "seed"), "expected an unsigned integer");
      c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("threads")) c.threads = static_cast<int>(count(j, p, "threads"));
    if (j.contains("output")) c.output_dir = text(j, p, "output");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace cli
