#include "photonshape/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "photonshape/error.hpp"
#include "photonshape/units.hpp"

namespace photonshape::io {
namespace {

using json = nlohmann::ordered_json;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  require(end != s.c_str() && *end == '\0', ErrorCode::Io, "malformed number for " + what + ": '" + s + "'");
  return v;
}

std::size_t parse_count(const std::string& s, const std::string& what) {
  const double v = parse_double(s, what);
  require(v >= 0.0 && v == std::floor(v), ErrorCode::Io, what + " must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

// Parses "# <tag> key=value ..." into a map.
std::map<std::string, std::string> read_header(std::istream& in, const std::string& tag) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::Io, "file is empty");
  std::istringstream is(strip_cr(line));
  std::string hash, got;
  is >> hash >> got;
  require(hash == "#" && got == tag, ErrorCode::Io, "expected a '# " + tag + "' header line");
  std::map<std::string, std::string> kv;
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    require(eq != std::string::npos, ErrorCode::Io, "malformed header token '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

const std::string& field(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  require(it != kv.end(), ErrorCode::Io, "header is missing '" + key + "'");
  return it->second;
}

std::vector<std::vector<double>> read_rows(std::istream& in, std::size_t min_cols, std::size_t max_cols,
                                           std::size_t expected_rows) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::Io, "missing column header");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    require(cells.size() >= min_cols && cells.size() <= max_cols, ErrorCode::Io,
            "row " + std::to_string(rows.size() + 1) + " has " + std::to_string(cells.size()) + " columns");
    std::vector<double> r;
    for (const auto& c : cells) r.push_back(parse_double(c, "cell"));
    rows.push_back(std::move(r));
  }
  require(rows.size() == expected_rows, ErrorCode::Io,
          "expected " + std::to_string(expected_rows) + " rows, found " + std::to_string(rows.size()));
  return rows;
}

json array(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

}  // namespace

void write_mode_csv(std::ostream& out, const TemporalMode& mode) {
  out << "# photonshape-mode t0=" << num(mode.t0()) << " dt=" << num(mode.dt()) << " n=" << mode.size()
      << " units=us,us^-1/2\n";
  out << "t,re,im\n";
  for (std::size_t j = 0; j < mode.size(); ++j) {
    out << num(mode.time(j)) << ',' << num(mode[j].real()) << ',' << num(mode[j].imag()) << '\n';
  }
}

TemporalMode read_mode_csv(std::istream& in) {
  const auto kv = read_header(in, "photonshape-mode");
  const double t0 = parse_double(field(kv, "t0"), "t0");
  const double dt = parse_double(field(kv, "dt"), "dt");
  const std::size_t n = parse_count(field(kv, "n"), "n");
  const auto rows = read_rows(in, 2, 3, n);
  std::vector<cplx> s(n);
  for (std::size_t j = 0; j < n; ++j) {
    require(std::abs(rows[j][0] - (t0 + dt * static_cast<double>(j))) <= 1e-9 * std::max(1.0, std::abs(dt)),
            ErrorCode::Io, "time column disagrees with the header grid at row " + std::to_string(j + 1));
    s[j] = cplx(rows[j][1], rows[j].size() == 3 ? rows[j][2] : 0.0);
  }
  return TemporalMode(t0, dt, std::move(s));
}

void write_pulse_csv(std::ostream& out, const ControlPulse& p) {
  out << "# photonshape-pulse direction=" << (p.direction == PulseDirection::Emission ? "emission" : "storage")
      << " t0=" << num(p.t0) << " dt=" << num(p.dt) << " n=" << p.size()
      << " compensation=" << (p.compensation ? 1 : 0) << " omega_max=" << num(p.omega_max)
      << " tail_epsilon=" << num(p.tail_epsilon) << " units=us,rad/us\n";
  out << "t,omega_re,omega_im,abs_omega_mhz,arg_omega,h\n";
  for (std::size_t j = 0; j < p.size(); ++j) {
    out << num(p.time(j)) << ',' << num(p.omega[j].real()) << ',' << num(p.omega[j].imag()) << ','
        << num(units::linear(std::abs(p.omega[j]))) << ',' << num(std::arg(p.omega[j])) << ','
        << num(p.h[j]) << '\n';
  }
}

ControlPulse read_pulse_csv(std::istream& in) {
  const auto kv = read_header(in, "photonshape-pulse");
  const std::string dir = field(kv, "direction");
  require(dir == "emission" || dir == "storage", ErrorCode::Io, "unknown pulse direction '" + dir + "'");
  const double t0 = parse_double(field(kv, "t0"), "t0");
  const double dt = parse_double(field(kv, "dt"), "dt");
  const std::size_t n = parse_count(field(kv, "n"), "n");
  const auto rows = read_rows(in, 3, 6, n);
  std::vector<cplx> omega(n);
  for (std::size_t j = 0; j < n; ++j) omega[j] = cplx(rows[j][1], rows[j][2]);
  ControlPulse p = pulse_from_samples(dir == "emission" ? PulseDirection::Emission : PulseDirection::Storage,
                                      t0, dt, std::move(omega));
  if (kv.count("compensation")) p.compensation = field(kv, "compensation") == "1";
  if (kv.count("omega_max")) p.omega_max = parse_double(field(kv, "omega_max"), "omega_max");
  if (kv.count("tail_epsilon")) p.tail_epsilon = parse_double(field(kv, "tail_epsilon"), "tail_epsilon");
  return p;
}

void write_records_csv(std::ostream& out, const QuadratureRecords& r) {
  out << "# photonshape-records t_start=" << num(r.grid.t_start) << " bin_width=" << num(r.grid.bin_width)
      << " n_bins=" << r.grid.n_bins << " trials=" << r.trials << " normalization=vacuum-unit-variance\n";
  for (std::size_t b = 0; b < r.grid.n_bins; ++b) out << (b ? "," : "") << 'x' << b;
  out << '\n';
  for (std::size_t k = 0; k < r.trials; ++k) {
    const double* x = r.trial(k);
    for (std::size_t b = 0; b < r.grid.n_bins; ++b) out << (b ? "," : "") << num(x[b]);
    out << '\n';
  }
}

QuadratureRecords read_records_csv(std::istream& in) {
  const auto kv = read_header(in, "photonshape-records");
  QuadratureRecords r;
  r.grid.t_start = parse_double(field(kv, "t_start"), "t_start");
  r.grid.bin_width = parse_double(field(kv, "bin_width"), "bin_width");
  r.grid.n_bins = parse_count(field(kv, "n_bins"), "n_bins");
  r.trials = parse_count(field(kv, "trials"), "trials");
  validate(r.grid);
  const auto rows = read_rows(in, r.grid.n_bins, r.grid.n_bins, r.trials);
  r.data.reserve(r.trials * r.grid.n_bins);
  for (const auto& row : rows) {
    for (double x : row) {
      require(std::isfinite(x), ErrorCode::Io, "records must be finite");
      r.data.push_back(x);
    }
  }
  return r;
}

void write_sim_csv(std::ostream& out, const SimResult& sim) {
  out << 't';
  for (const auto& l : sim.level_labels) out << ",pop_" << l;
  out << ",flux_sigma_plus,flux_sigma_minus,out_sigma_plus,out_sigma_minus,lost_sigma_plus,lost_sigma_minus"
         ",photons_sigma_plus,photons_sigma_minus,coherent_re,coherent_im,trace\n";
  for (std::size_t i = 0; i < sim.times.size(); ++i) {
    out << num(sim.times[i]);
    for (double p : sim.atomic_populations[i]) out << ',' << num(p);
    out << ',' << num(sim.flux_out[i][0]) << ',' << num(sim.flux_out[i][1]) << ',' << num(sim.out_coupled[i][0])
        << ',' << num(sim.out_coupled[i][1]) << ',' << num(sim.lost[i][0]) << ',' << num(sim.lost[i][1]) << ','
        << num(sim.photon_number[i][0]) << ',' << num(sim.photon_number[i][1]) << ','
        << num(sim.coherent_amplitude[i].real()) << ',' << num(sim.coherent_amplitude[i].imag()) << ','
        << num(sim.trace[i]) << '\n';
  }
}

std::string emission_summary_json(const EmissionReport& r) {
  json j;
  j["signal_polarization"] = kModeName[r.sim.signal_mode];
  j["efficiency"] = r.efficiency;
  j["wrong_polarization"] = r.wrong_polarization;
  j["coherent_efficiency"] = r.coherent_efficiency;
  j["analytic_efficiency"] = std::isfinite(r.analytic_efficiency) ? json(r.analytic_efficiency) : json(nullptr);
  j["incoherent_fraction"] = r.incoherent_fraction;
  j["wrong_polarization_fraction"] = r.wrong_polarization_fraction;
  if (r.target) {
    j["mode_fidelity"] = r.mode_fidelity;
    j["intensity_fidelity"] = r.intensity_fidelity;
    j["arrival_delay_us"] = r.arrival_delay;
    j["aligned_mode_fidelity"] = r.aligned_mode_fidelity;
  }
  const auto& out = r.sim.out_coupled.back();
  const auto& lost = r.sim.lost.back();
  j["out_coupled"] = {{"sigma_plus", out[0]}, {"sigma_minus", out[1]}};
  j["lost"] = {{"sigma_plus", lost[0]}, {"sigma_minus", lost[1]}};
  j["trace_drift"] = r.sim.max_trace_drift;
  j["integrator_steps"] = r.sim.steps;
  j["step_us"] = r.sim.step;
  j["block_dimension"] = r.sim.block_dimension;
  return j.dump(2) + "\n";
}

std::string decomposition_json(const ModeDecomposition& dec, const ReconstructedMode* rec) {
  json j;
  j["grid"] = {{"t_start_us", dec.grid.t_start}, {"bin_width_us", dec.grid.bin_width}, {"n_bins", dec.grid.n_bins}};
  j["trials"] = dec.trials;
  j["eigenvalues"] = array(dec.eigenvalues);
  j["photon_numbers"] = array(dec.photon_numbers);
  json ef = json::array();
  for (const auto& f : dec.eigenfunctions) ef.push_back(array(f));
  j["eigenfunctions"] = ef;
  if (rec) {
    json m;
    m["has_mode"] = rec->has_mode;
    m["significant"] = rec->significant;
    m["threshold"] = rec->threshold;
    m["n1"] = rec->n1;
    m["n2"] = rec->n2;
    std::vector<double> re, im, t;
    json phase = json::array();
    for (std::size_t b = 0; b < rec->mode.size(); ++b) {
      t.push_back(rec->grid.centre(b));
      re.push_back(rec->mode[b].real());
      im.push_back(rec->mode[b].imag());
      phase.push_back(rec->phase_defined[b] ? json(rec->phase[b]) : json(nullptr));
    }
    m["t_us"] = array(t);
    m["re"] = array(re);
    m["im"] = array(im);
    m["phase_rad"] = phase;
    m["phase_sign"] = rec->n2 > 0.0 ? "ambiguous: +phase and -phase are both consistent" : "none";
    j["reconstruction"] = m;
  }
  return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::Io, "cannot open " + path.string() + " for writing");
  f << content;
  f.close();
  require(static_cast<bool>(f), ErrorCode::Io, "failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace photonshape::io
