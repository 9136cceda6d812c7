#include "soliton/modulation.hpp"

#include <doctest.h>

#include <numbers>

using namespace soliton;

namespace {

const Nonlinearity<double> test_nl{{0.2, 0.8}};
const SolitonParams<double> test_soliton{1.0, 0.25, 0.0};

Linearization<double> test_lin() { return Linearization<double>::from(test_nl, test_soliton); }

FieldState<double> bump(const Grid<double> &g, double amp) {
  FieldState<double> f(g);
  for (Eigen::Index i = 0; i < g.n; ++i) {
    const double x = g.x(i);
    f.values(i, 0) = amp * std::exp(-(x - 2) * (x - 2));
    f.values(i, 1) = amp * 0.5 * std::exp(-(x + 1) * (x + 1));
  }
  return f;
}

} // namespace

TEST_CASE("amplitude on the branch") {
  CHECK(amplitude_on_branch(test_nl, 0.25, 0.9) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK_THROWS(amplitude_on_branch(test_nl, 0.001, 1.0));
}

TEST_CASE("prepare then extract is the identity for small data") {
  const auto g = Grid<double>::from_half_width(300.0, 0.05);
  const auto lin = test_lin();
  for (std::complex<double> z0 : {std::complex<double>(1e-2, 0), std::complex<double>(-3e-3, 7e-3), std::complex<double>(0, 0)}) {
    for (double theta : {0.0, 1.3}) {
      SolitonParams<double> p = test_soliton;
      p.theta = theta;
      const auto data = prepare_initial_data(p, z0, bump(g, 1e-3), lin, g);
      CHECK(data.epsilon == doctest::Approx(std::norm(z0)));
      const auto fr = extract_frame(data.psi, test_nl, FrameGuess<double>{0.25 + 1e-3, theta - 1e-3, 1.0});
      CHECK(std::abs(fr.omega - 0.25) < 1e-8);
      CHECK(std::abs(std::remainder(fr.theta - theta, 2 * std::numbers::pi)) < 1e-8);
      CHECK(std::abs(fr.z - z0) < 1e-8);
      CHECK(fr.orthogonality < 1e-6);
    }
  }
}

TEST_CASE("pure soliton extracts with zero remainder") {
  const auto g = Grid<double>::from_half_width(60.0, 0.05);
  const auto data = prepare_initial_data(test_soliton, {0.0, 0.0}, FieldState<double>{}, test_lin(), g);
  const auto fr = extract_frame(data.psi, test_nl, FrameGuess<double>{0.26, 0.1, 1.0});
  CHECK(std::abs(fr.omega - 0.25) < 1e-12);
  CHECK(std::abs(fr.theta) < 1e-12);
  CHECK(std::abs(fr.z) < 1e-12);
  CHECK(fr.f.values.norm() < 1e-12);
}

TEST_CASE("frame is gauge covariant") {
  const auto g = Grid<double>::from_half_width(200.0, 0.05);
  const auto data = prepare_initial_data(test_soliton, {4e-3, 2e-3}, bump(g, 1e-3), test_lin(), g);
  const auto a = extract_frame(data.psi, test_nl, FrameGuess<double>{0.25, 0.0, 1.0});
  const double phi = 0.8;
  Field<double> rotated = std::cos(phi) * data.psi.values + std::sin(phi) * apply_j(data.psi.values);
  const auto b = extract_frame(FieldState<double>(rotated, g), test_nl, FrameGuess<double>{0.25, phi, 1.0});
  CHECK(std::abs(a.omega - b.omega) < 1e-12);
  CHECK(std::abs(std::remainder(b.theta - a.theta - phi, 2 * std::numbers::pi)) < 1e-12);
  CHECK(std::abs(a.z - b.z) < 1e-12);
  CHECK((a.f.values - b.f.values).norm() < 1e-11);
}

TEST_CASE("track of an unperturbed soliton") {
  // The sampled continuum soliton differs from the discrete stationary state by O(dx^2),
  // which shows up as a small bounded z.
  auto worst_z = [](double dx) {
    EvolutionConfig<double> cfg;
    cfg.L = 40;
    cfg.T = 4;
    cfg.dx = dx;
    cfg.log_every = 0.5;
    const auto f0 = soliton_field(test_soliton, cfg.grid());
    Tracker<double> tracker(test_nl, cfg.grid(), FrameGuess<double>{0.25, 0.0, 1.0});
    evolve(f0, test_nl, cfg, tracker.observer());
    const auto &tr = tracker.track();
    REQUIRE_FALSE(tr.truncated);
    REQUIRE(tr.rows.size() == 9);
    double z = 0;
    for (const auto &r : tr.rows) {
      CHECK(std::abs(r.omega - 0.25) < 1e-3);
      CHECK(std::abs(r.gamma) < 1e-2);
      z = std::max(z, std::abs(r.z));
    }
    return z;
  };
  const double coarse = worst_z(0.05), fine = worst_z(0.025);
  CHECK(coarse < 1e-4);
  CHECK(coarse / fine > 3);
}

TEST_CASE("small internal-mode oscillation stays linear") {
  EvolutionConfig<double> cfg;
  cfg.L = 150;
  cfg.T = 50;
  cfg.log_every = 0.25;
  cfg.boundary = Boundary::absorbing_layer;
  cfg.layer_width = 30;
  const auto g = cfg.grid();
  const double z0 = 2e-3;
  const auto data = prepare_initial_data(test_soliton, {z0, 0.0}, FieldState<double>{}, test_lin(), g);
  Tracker<double> tracker(test_nl, g, FrameGuess<double>{0.25, 0.0, 1.0});
  evolve(data.psi, test_nl, cfg, tracker.observer());
  const auto &tr = tracker.track();
  REQUIRE_FALSE(tr.truncated);
  std::vector<double> re;
  double worst = 0, orth = 0;
  for (const auto &r : tr.rows) {
    worst = std::max(worst, std::abs(std::abs(r.z) / z0 - 1));
    if (r.f_L2 > 1e-8) orth = std::max(orth, r.orthogonality); // skip f at roundoff level
    re.push_back(r.z.real());
  }
  CHECK(worst < 0.05);
  CHECK(orth < 1e-6);
  CHECK(spectral_peak(tr.times(), re, 0.05, 1.0) == doctest::Approx(0.24).epsilon(0.02));
}

TEST_CASE("reflection window") {
  EvolutionConfig<double> cfg;
  cfg.L = 200;
  cfg.T = 500;
  CHECK(reflection_time(cfg) == doctest::Approx(50.0));
  cfg.boundary = Boundary::absorbing_layer;
  CHECK(reflection_time(cfg) == doctest::Approx(500.0));
}
