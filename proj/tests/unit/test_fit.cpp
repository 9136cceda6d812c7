#include "soliton/modulation.hpp"

#include <doctest.h>

#include <random>

using namespace soliton;

namespace {

ModulationTrack<double> synthetic_track(double y0, double lambda, double mu, double noise, double T) {
  ModulationTrack<double> tr;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N(0.0, noise);
  for (double t = 0; t <= T + 1e-9; t += 0.25) {
    TrackRow<double> r{};
    const double y = y0 / (1 + lambda * t) * (1 + N(rng));
    r.t = t;
    r.z = std::polar(std::sqrt(y), mu * t);
    r.omega = 0.25 + 0.01 / (1 + t) * std::cos(2 * mu * t + 0.3);
    r.f_inf_mbeta = 0.01 / (1 + t);
    r.f_L2 = 0.01;
    tr.rows.push_back(r);
  }
  return tr;
}

} // namespace

TEST_CASE("line fit") {
  const auto f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.rms < 1e-12);
  CHECK_THROWS(fit_line({1.0}, {2.0}));
}

TEST_CASE("log-log slope of a power law") {
  std::vector<double> t, v;
  for (int i = 1; i <= 200; ++i) {
    t.push_back(i);
    v.push_back(3 * std::pow(i, -1.5));
  }
  const auto f = fit_loglog("power", t, v, 5, 150);
  CHECK(f.ok);
  CHECK(f.param("exponent") == doctest::Approx(-1.5).epsilon(1e-10));
  CHECK(std::exp(f.param("log_prefactor")) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(f.t0 == 5);
  CHECK(f.samples == 146);
}

TEST_CASE("Levenberg-Marquardt recovers an exponential") {
  std::vector<double> t, y;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(0.1 * i);
    y.push_back(2 * std::exp(-0.7 * t.back()) + 0.1);
  }
  const Model m = [](const Eigen::VectorXd &p, double s) { return p(0) * std::exp(-p(1) * s) + p(2); };
  Eigen::VectorXd guess(3);
  guess << 1, 1, 0;
  const auto f = fit_curve("exp", {"A", "k", "c"}, m, guess, t, y, 0, 10);
  CHECK(f.ok);
  CHECK(f.param("k") == doctest::Approx(0.7).epsilon(1e-8));
  CHECK(f.param("c") == doctest::Approx(0.1).epsilon(1e-8));
  CHECK_THROWS(f.param("missing"));
}

TEST_CASE("spectral peak") {
  std::vector<double> t, y;
  for (int i = 0; i < 4000; ++i) {
    t.push_back(0.05 * i);
    y.push_back(std::cos(0.48 * t.back() + 1) + 0.3 * std::sin(1.7 * t.back()));
  }
  CHECK(spectral_peak(t, y, 0.1, 1.0) == doctest::Approx(0.48).epsilon(2e-3));
  CHECK(spectral_peak(t, y, 1.0, 3.0) == doctest::Approx(1.7).epsilon(2e-3));
}

TEST_CASE("Ricatti fit of a synthetic decay") {
  const auto tr = synthetic_track(1e-2, 0.002, 0.24, 0.01, 400);
  const auto f = fit_ricatti(tr, 5, 400);
  CHECK(f.ok);
  CHECK(f.param("lambda") == doctest::Approx(0.002).epsilon(0.05));
  CHECK(f.param("y0") == doctest::Approx(1e-2).epsilon(0.02));
}

TEST_CASE("decay laws of a synthetic track") {
  const auto tr = synthetic_track(1e-2, 0.05, 0.24, 0.0, 400);
  const auto d = fit_decay_laws(tr, 20, 400, 0.24);
  CHECK(d.f_slope.param("exponent") == doctest::Approx(-1.0).epsilon(0.05));
  CHECK(d.z_slope.param("exponent") < -0.3);
  CHECK(d.omega.param("frequency") == doctest::Approx(0.48).epsilon(0.01));
}
