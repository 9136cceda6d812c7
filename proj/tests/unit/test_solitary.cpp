#include "soliton/solitary.hpp"

#include <doctest.h>

using namespace soliton;

TEST_CASE("amplitudes for a given frequency") {
  auto c = amplitudes_for_frequency(Nonlinearity<double>{{0.2, 0.8}}, 0.25);
  REQUIRE(c.size() == 1);
  CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(amplitudes_for_frequency(Nonlinearity<double>{{-1.0}}, 0.5).empty());
  c = amplitudes_for_frequency(Nonlinearity<double>{{0.0, 1.0}}, 1.0);
  REQUIRE(c.size() == 1);
  CHECK(c[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
  // two branches for a(s) = 2 - (s - 1)^2 at omega = 0.25: s = 1 +- sqrt(1)
  c = amplitudes_for_frequency(Nonlinearity<double>{{1.0, 2.0, -1.0}}, 0.25);
  REQUIRE(c.size() == 1);
  CHECK(c[0] == doctest::Approx(std::sqrt(2.0)));
  c = amplitudes_for_frequency(Nonlinearity<double>{{0.5, 2.0, -1.0}}, 0.25);
  REQUIRE(c.size() == 2);
  CHECK(c[0] * c[0] == doctest::Approx(1 - std::sqrt(0.5)));
  CHECK(c[1] * c[1] == doctest::Approx(1 + std::sqrt(0.5)));
}

TEST_CASE("sturm root isolation") {
  const auto r = real_roots(std::vector<double>{6, -11, 6, -1}, 0.0, 10.0); // (s-1)(s-2)(s-3), ascending coefficients
  REQUIRE(r.size() == 3);
  CHECK(r[0] == doctest::Approx(1.0));
  CHECK(r[2] == doctest::Approx(3.0));
}

TEST_CASE("soliton params validation") {
  const Nonlinearity<double> nl{{0.2, 0.8}};
  const SolitonParams<double> good{1.0, 0.25, 0.0}, bad{1.0, 0.3, 0.0};
  CHECK_NOTHROW(good.validate(nl));
  CHECK_THROWS_AS(bad.validate(nl), std::invalid_argument);
}

TEST_CASE("soliton field samples") {
  const auto g = Grid<double>::from_half_width(20.0, 0.05);
  const auto f = soliton_field(SolitonParams<double>{1.0, 0.25, 0.0}, g);
  CHECK(f.values.col(1).norm() == 0.0);
  const auto r = soliton_field(SolitonParams<double>{1.3, 0.25, 0.7}, g);
  CHECK(r.at_origin()(0).real() == doctest::Approx(1.3 * std::cos(0.7)));
  CHECK(r.at_origin()(1).real() == doctest::Approx(1.3 * std::sin(0.7)));
}

TEST_CASE("charge derivative and branch derivatives") {
  const Nonlinearity<double> nl{{0.2, 0.8}};
  const SolitonParams<double> p{1.0, 0.25, 0.0};
  CHECK(charge_derivative(nl, p) == doctest::Approx(1.0));
  auto C_of = [&](double om) { return amplitudes_for_frequency(nl, om)[0]; };
  const double h = 1e-4;
  auto Q = [&](double om) { return C_of(om) * C_of(om) / std::sqrt(om); };
  CHECK(charge_derivative(nl, p) == doctest::Approx((Q(0.25 + h) - Q(0.25 - h)) / (2 * h)).epsilon(1e-7));
  const auto d = branch_derivatives(nl, p);
  CHECK(d.dC == doctest::Approx((C_of(0.25 + h) - C_of(0.25 - h)) / (2 * h)).epsilon(1e-7));
  CHECK(d.d2C == doctest::Approx((C_of(0.25 + h) - 2 * C_of(0.25) + C_of(0.25 - h)) / (h * h)).epsilon(1e-5));
  // a' = a / C^2 exactly: the derivative vanishes
  const Nonlinearity<double> lin{{0.0, 1.0}};
  CHECK(std::abs(charge_derivative(lin, SolitonParams<double>{1.0, 0.25, 0.0})) < 1e-14);
}

TEST_CASE("charge derivative is positive iff a' < a / C^2") {
  std::uint32_t state = 12345;
  auto next = [&] {
    state = state * 1664525u + 1013904223u;
    return (state >> 8) / double(1 << 24);
  };
  for (int k = 0; k < 200; ++k) {
    const double a0 = 0.1 + next(), a1 = 0.05 + 2 * next(), C = 0.3 + 2 * next();
    const Nonlinearity<double> nl{{a0, a1}};
    const double a = eval_a(nl, C * C);
    const SolitonParams<double> p{C, a * a / 4, 0.0};
    CHECK((charge_derivative(nl, p) > 0) == (a1 < a / (C * C)));
  }
}

TEST_CASE("omega derivatives of the profile match finite differences") {
  const Nonlinearity<double> nl{{0.2, 0.8, -0.1}};
  const auto g = Grid<double>::from_half_width(10.0, 0.1);
  const double om = 0.3, h = 1e-4;
  auto params = [&](double w) { return SolitonParams<double>{amplitudes_for_frequency(nl, w)[0], w, 0.0}; };
  const auto P0 = soliton_profile(nl, params(om - h), g), P1 = soliton_profile(nl, params(om + h), g);
  const auto Pm = soliton_profile(nl, params(om), g);
  const RealVector<double> fd1 = (P1 - P0) / (2 * h);
  const RealVector<double> fd2 = (P1 - 2 * Pm + P0) / (h * h);
  CHECK((soliton_profile(nl, params(om), g, 1) - fd1).lpNorm<Eigen::Infinity>() < 1e-7);
  CHECK((soliton_profile(nl, params(om), g, 2) - fd2).lpNorm<Eigen::Infinity>() < 1e-4);
  CHECK_THROWS_AS(soliton_profile(nl, params(om), g, 3), std::invalid_argument);
}
