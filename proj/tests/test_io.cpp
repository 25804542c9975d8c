#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "photonshape/cqed.hpp"
#include "photonshape/error.hpp"
#include "photonshape/homodyne.hpp"
#include "photonshape/io.hpp"
#include "photonshape/pulse.hpp"

using namespace photonshape;

namespace {

const CqedParams kCavity{4.9, 2.4, 0.3, 3.03};

TemporalMode chirped(std::size_t n = 500) {
  ShapeSpec s;
  s.characteristic = 0.5;
  s.t_min = -2.5;
  s.t_max = 2.5;
  s.n_samples = n;
  s.phase_jump = PhaseJump{0.1, 0.7};
  const TemporalMode m = make_shape(s);
  return apply_log_phase(m, m, 0.37);
}

template <typename T, typename W, typename R>
T round_trip(const T& value, W write, R read) {
  std::stringstream ss;
  write(ss, value);
  return read(ss);
}

}  // namespace

TEST_CASE("mode CSV round trip is bit exact") {
  const TemporalMode m = chirped();
  const TemporalMode r = round_trip(m, io::write_mode_csv, io::read_mode_csv);
  CHECK(r.t0() == m.t0());
  CHECK(r.dt() == m.dt());
  CHECK(r.samples() == m.samples());
  std::stringstream a, b;
  io::write_mode_csv(a, m);
  io::write_mode_csv(b, r);
  CHECK(a.str() == b.str());
}

TEST_CASE("two-column mode CSV reads as a real mode") {
  std::stringstream ss;
  ss << "# photonshape-mode t0=0 dt=0.25 n=16 units=us,us^-1/2\nt,re\n";
  for (int j = 0; j < 16; ++j) ss << 0.25 * j << ',' << 0.5 << '\n';
  const TemporalMode m = io::read_mode_csv(ss);
  CHECK(m.size() == 16);
  CHECK(m[3] == cplx(0.5, 0.0));
}

TEST_CASE("malformed mode files are rejected") {
  const auto expect_io = [](const std::string& text) {
    std::stringstream ss(text);
    try {
      io::read_mode_csv(ss);
      FAIL("accepted: " << text);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Io);
    }
  };
  expect_io("");
  expect_io("t,re,im\n0,1,0\n");
  expect_io("# photonshape-pulse t0=0 dt=1 n=1\n");
  expect_io("# photonshape-mode t0=0 n=16\nt,re,im\n");
  expect_io("# photonshape-mode t0=0 dt=0.1 n=2\nt,re,im\n0,1,0\n");
  expect_io("# photonshape-mode t0=0 dt=0.1 n=1\nt,re,im\n0,abc,0\n");
  expect_io("# photonshape-mode t0=0 dt=0.1 n=1\nt,re,im\n0.5,1,0\n");
}

TEST_CASE("pulse CSV round trip") {
  const AdiabaticCoeffs c = adiabatic_coeffs(kCavity, build_scheme(kCavity, -20.0, Variant::ThreeLevel,
                                                                  default_reference_data()));
  for (bool storage : {false, true}) {
    const TemporalMode m = chirped();
    const ControlPulse p = storage ? storage_control(m, c, PulseOptions{}) : emission_control(m, c, PulseOptions{});
    const ControlPulse r = round_trip(p, io::write_pulse_csv, io::read_pulse_csv);
    CHECK(r.direction == p.direction);
    CHECK(r.t0 == p.t0);
    CHECK(r.dt == p.dt);
    CHECK(r.omega == p.omega);
    CHECK(r.h == p.h);
    CHECK(r.compensation == p.compensation);
    CHECK(r.omega_max == p.omega_max);
    CHECK(r.tail_epsilon == p.tail_epsilon);
  }
}

TEST_CASE("records CSV round trip") {
  const RecordGrid g{-1.25, 0.125, 20};
  const QuadratureRecords q = synth_records(chirped(), 0.284, 257, g, 99);
  const QuadratureRecords r = round_trip(q, io::write_records_csv, io::read_records_csv);
  CHECK(r.trials == q.trials);
  CHECK(r.grid.t_start == q.grid.t_start);
  CHECK(r.grid.bin_width == q.grid.bin_width);
  CHECK(r.grid.n_bins == q.grid.n_bins);
  CHECK(r.data == q.data);
  std::stringstream bad("# photonshape-records t_start=0 bin_width=0.1 n_bins=2 trials=1 normalization=vacuum-unit-variance\nx0,x1\n1,nan\n");
  CHECK_THROWS_AS(io::read_records_csv(bad), Error);
}

TEST_CASE("JSON exports parse and carry the key fields") {
  const RecordGrid g{-1.25, 0.125, 20};
  const RealMatrix I = RealMatrix::identity(20);
  const auto u = bin_mode(chirped(), g);
  const ModeDecomposition d = decompose(analytic_covariance(decompose_real_imag(u, 0.284), 20), I, g, 0);
  const ReconstructedMode rec = reconstruct_mode(d);
  const auto j = nlohmann::json::parse(io::decomposition_json(d, &rec));
  CHECK(j["eigenvalues"].size() == 20);
  CHECK(j["reconstruction"]["significant"] == 2);
  CHECK(j["reconstruction"]["re"].size() == 20);
  CHECK(j["grid"]["n_bins"] == 20);
  const auto j2 = nlohmann::json::parse(io::decomposition_json(d, nullptr));
  CHECK_FALSE(j2.contains("reconstruction"));
}

TEST_CASE("text file helpers") {
  const auto dir = std::filesystem::temp_directory_path() / "photonshape_test_io";
  std::filesystem::create_directories(dir);
  io::write_text_file(dir / "a.txt", "line\n");
  CHECK(io::read_text_file(dir / "a.txt") == "line\n");
  CHECK_THROWS_AS(io::read_text_file(dir / "missing.txt"), Error);
  std::filesystem::remove_all(dir);
}
