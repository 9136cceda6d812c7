#include "soliton/fgr.hpp"

#include <doctest.h>

#include <random>

using namespace soliton;

namespace {

Linearization<double> test_lin() { return Linearization<double>::from_values(1.0, 0.8, 0.0, 1.0); }

// Pairing at x = 0 without the closed-form guard, for an arbitrary u(0).
std::complex<double> direct(const Linearization<double> &lin, const Pair<double> &u0) {
  const Pair<double> tau0 = continuous_at(lin, 2 * *lin.mu, 0.0).first;
  const Pair<double> E = E2_at_origin(lin, u0, u0);
  return tau0(0) * std::conj(E(0)) + tau0(1) * std::conj(E(1));
}

} // namespace

TEST_CASE("pairing scalars at the test parameters") {
  const auto lin = test_lin();
  const auto e = pairing_scalars(lin);
  CHECK(e.nu == doctest::Approx(0.8));
  CHECK(e.rho == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(e.rho * eigen_coefficient(lin) == doctest::Approx(1.0).epsilon(1e-12));
  const auto bf = at_imag(2 * *lin.mu, Side::plus_edge);
  CHECK(k_pm(lin, bf, Which::plus).real() == doctest::Approx(-std::sqrt(0.23)).epsilon(1e-14));
  CHECK(std::abs(e.sigma - std::complex<double>(0, 4 * 0.8) * k_pm(lin, bf, Which::plus)) < 1e-15);
}

TEST_CASE("direct pairing equals the closed form") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int tested = 0;
  for (int i = 0; i < 50; ++i) {
    const double a = 0.3 + 2 * u01(rng);
    const double beta = a / std::sqrt(2.0) + (window_upper(a) - a / std::sqrt(2.0)) * (0.01 + 0.98 * u01(rng));
    const double C = 0.5 + u01(rng);
    const auto lin = Linearization<double>::from_values(a, beta / (C * C), 2 * u01(rng) - 1, C);
    REQUIRE(spectral_condition(lin) == SpectralClass::in_window);
    const auto e = pairing_scalars(lin);
    const auto closed = fgr_closed_form(lin, e);
    const auto d = direct(lin, Pair<double>(e.rho * eigenfunction_at(lin, 0.0)));
    CHECK(std::abs(d - closed) <= 1e-9 * std::abs(closed));
    ++tested;
  }
  CHECK(tested == 50);
}

TEST_CASE("damping coefficient at the test parameters") {
  const auto lin = test_lin();
  const auto r = damping_coefficient(lin);
  CHECK(r.delta == doctest::Approx(60.0 / 7).epsilon(1e-9));
  CHECK(r.delta_closed == doctest::Approx(60.0 / 7).epsilon(1e-14));
  CHECK(r.re_iK == doctest::Approx(-0.366444).epsilon(1e-5));
  CHECK(r.re_iK < 0);
  CHECK(predicted_lambda(r.re_iK, 0.01) == doctest::Approx(2 * 0.366444 * 0.01).epsilon(1e-5));
}

TEST_CASE("observable decay rate is invariant under rescaling u") {
  const auto lin = test_lin();
  const double y0 = 1e-2;
  const double ref = predicted_lambda(damping_coefficient(lin, {1.0}, false).re_iK, y0);
  for (std::complex<double> c : {std::complex<double>(-0.5, 0), std::complex<double>(0.3, 1.7), std::complex<double>(0, 2)}) {
    const double lam = predicted_lambda(damping_coefficient(lin, c, false).re_iK, y0 / std::norm(c));
    CHECK(std::abs(lam / ref - 1) < 1e-9);
  }
}

TEST_CASE("fgr report for the test nonlinearity") {
  const Nonlinearity<double> nl{{0.2, 0.8}};
  const auto r = fgr_report(nl, 1.0);
  CHECK(r.klass == SpectralClass::in_window);
  CHECK(r.holds);
  CHECK(r.re_iK == doctest::Approx(-0.366444).epsilon(1e-5));
  CHECK(std::abs(r.fgr_lhs) > 0);
  const auto out = fgr_report(nl, 0.5); // beta = 0.2 < a / sqrt2
  CHECK(out.klass == SpectralClass::below_window);
  CHECK_FALSE(out.evaluated);
}

TEST_CASE("fgr zero crossings coincide with zeros of the pairing") {
  // a'' != 0 moves the margin through zero inside the window
  const Nonlinearity<double> nl{{0.2, 0.8, 0.6, -0.2}};
  std::vector<double> Cs;
  for (int i = 0; i <= 200; ++i) Cs.push_back(0.5 + 2.5 * i / 200);
  const auto scan = fgr_scan(nl, Cs);
  int evaluated = 0;
  for (const auto &row : scan.rows) evaluated += row.evaluated;
  CHECK(evaluated > 0);
  REQUIRE(scan.zero_crossings.size() == 1);
  CHECK(scan.zero_crossings[0] == doctest::Approx(1.205035).epsilon(1e-5));
  for (double C : scan.zero_crossings) {
    const auto at = fgr_report(nl, C, false);
    CHECK(at.margin <= 1e-8);
    const double s = C * C;
    const auto lin = Linearization<double>::from_values(eval_a(nl, s), eval_a(nl, s, 1), eval_a(nl, s, 2), C);
    const auto e = pairing_scalars(lin);
    const double scale = std::abs(e.sigma) * (std::abs(lin.aprime * C) + std::abs(lin.asecond * C * C * C));
    CHECK(std::abs(fgr_closed_form(lin, e)) < 1e-8 * scale);
    // the closed form changes sign-phase across the crossing, so its modulus has a strict minimum there
    const auto near = [&](double c) {
      const double t = c * c;
      const auto l = Linearization<double>::from_values(eval_a(nl, t), eval_a(nl, t, 1), eval_a(nl, t, 2), c);
      return std::abs(fgr_closed_form(l, pairing_scalars(l)));
    };
    CHECK(near(C - 1e-4) > std::abs(fgr_closed_form(lin, e)));
    CHECK(near(C + 1e-4) > std::abs(fgr_closed_form(lin, e)));
  }
}
