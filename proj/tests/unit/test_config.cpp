#include "soliton/commands.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace soliton;

namespace {

const char *flagship = R"(# flagship
[nonlinearity]
coefficients = 0.2, 0.8
[soliton]
omega = 0.25
[grid]
dx = 0.05
L = 200
[time]
dt = 0.01
T = 300
[perturbation]
z0_re = 0.1
)";

std::filesystem::path scratch(const std::string &name) {
  const auto dir = std::filesystem::temp_directory_path() / "soliton_unit";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string error_field(const std::string &text) {
  try {
    parse_config(text);
  } catch (const config_error &e) {
    return e.field();
  }
  return "";
}

} // namespace

TEST_CASE("parse a flagship config") {
  const auto c = parse_config(flagship);
  CHECK(c.coefficients == std::vector<double>{0.2, 0.8});
  REQUIRE(c.omega);
  CHECK(*c.omega == 0.25);
  CHECK_FALSE(c.C);
  CHECK(c.T == 300);
  CHECK(c.z0 == std::complex<double>(0.1, 0));
  CHECK(c.boundary == Boundary::absorbing_layer);
  CHECK(c.soliton().C == doctest::Approx(1.0));
}

TEST_CASE("echo round trip") {
  auto c = parse_config(flagship);
  c.f0 = Perturbation::gaussian;
  c.f0_amplitude = 1e-3;
  c.theta = 0.1 + 0.2; // not exactly representable in short decimal form
  c.betas = {2, 2.5};
  const auto again = parse_config(echo_config(c));
  CHECK(again == c);
}

TEST_CASE("diagnostics name the offending field") {
  const std::string base = "[soliton]\nomega = 0.25\n";
  CHECK(error_field("[nonlinearity]\ncoefficients = 0.2, x\n" + base) == "nonlinearity.coefficients");
  CHECK(error_field(base + "[grid]\ndx = -1\n") == "grid.dx");
  CHECK(error_field(base + "[grid]\nspacing = 1\n") == "grid.spacing");
  CHECK(error_field(base + "[grid]\ndx = 0.1\ndx = 0.2\n") == "grid.dx");
  CHECK(error_field(base + "[mystery]\n") == "mystery");
  CHECK(error_field(base + "[boundary]\ntype = sponge\n") == "boundary.type");
  CHECK(error_field("[soliton]\nomega = 0.25\nC = 1\n") == "soliton.C");
  CHECK(error_field("[nonlinearity]\ncoefficients = -1\n[soliton]\nC = 1\n") == "soliton.C");
  try {
    parse_config(base + "\n[grid]\ndx = zero\n");
    FAIL("expected a config error");
  } catch (const config_error &e) {
    CHECK(e.line() == 5);
    CHECK(std::string(e.what()).find("grid.dx") != std::string::npos);
  }
}

TEST_CASE("comments and whitespace") {
  const auto c = parse_config("; lead\n[soliton]\n  omega   =  0.25   # trailing\n\n[grid]\nL = 50\n[boundary]\nlayer_width = 10\n");
  CHECK(c.L == 50);
}

TEST_CASE("csv formatting") {
  CsvTable t({"t", "v"});
  t.row({0.1, 1.0 / 3}).row({std::nan(""), -std::numeric_limits<double>::infinity()});
  CHECK(t.str() == "t,v\n0.10000000000000001,0.33333333333333331\nnan,-inf\n");
  CHECK(t.rows() == 2);
  CHECK_THROWS_AS(t.row({1.0}), std::invalid_argument);
}

TEST_CASE("atomic write replaces the file in one step") {
  const auto p = scratch("atomic.txt");
  write_atomic(p, "first");
  write_atomic(p, "second");
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "second");
  for (const auto &e : std::filesystem::directory_iterator(p.parent_path()))
    CHECK(e.path().filename().string().find(".tmp.") == std::string::npos);
}

TEST_CASE("exit codes") {
  std::ostringstream log;
  const auto bad = scratch("bad.ini");
  write_atomic(bad, "[nonlinearity]\ncoefficients = 0.2,,0.8\n[soliton]\nomega = 0.25\n");
  CHECK(run_command("spectrum", bad.string(), log) == exit_config);
  CHECK(log.str().find("nonlinearity.coefficients") != std::string::npos);
  CHECK(run_command("spectrum", scratch("missing.ini").string(), log) == exit_config);

  const auto good = scratch("good.ini");
  write_atomic(good, std::string(flagship) + "[output]\ndirectory = " + scratch("spectrum_out").string() + "\n");
  CHECK(run_command("spectrum", good.string(), log) == exit_ok);
  CHECK(std::filesystem::exists(scratch("spectrum_out") / "spectrum.json"));
  CHECK(run_command("nonsense", good.string(), log) == exit_config);
}
