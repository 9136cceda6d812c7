#include "soliton/grid.hpp"

#include <doctest.h>

#include <cmath>

using namespace soliton;

TEST_CASE("grid from half width places the origin on a node") {
  const auto g = Grid<double>::from_half_width(10.0, 0.05);
  CHECK(g.n % 2 == 1);
  CHECK(g.x(g.center()) == 0.0);
  CHECK(g.half_width() == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(g.x(0) == doctest::Approx(-10.0));
}

TEST_CASE("field validation rejects wrong sizes and non-finite values") {
  const auto g = Grid<double>::from_half_width(1.0, 0.1);
  CHECK_THROWS_AS(FieldState<double>(Field<double>::Zero(g.n + 1, 2), g), std::invalid_argument);
  Field<double> v = Field<double>::Zero(g.n, 2);
  v(3, 1) = std::nan("");
  CHECK_THROWS_AS(FieldState<double>(v, g), numerical_error);
}

TEST_CASE("j squares to minus one") {
  const auto g = Grid<double>::from_half_width(1.0, 0.1);
  FieldState<double> f(g);
  for (Eigen::Index i = 0; i < g.n; ++i) f.values.row(i) << std::complex<double>(i, 1), std::complex<double>(-2.0 * i, 0.5);
  const auto jj = apply_j(apply_j(f));
  CHECK((jj.values + f.values).norm() == 0.0);
}

TEST_CASE("gregory weights integrate piecewise polynomials exactly on each half-line") {
  const auto g = Grid<double>::from_half_width(3.0, 0.1);
  const auto w = quadrature_weights(g, Quadrature::gregory);
  for (int k = 0; k <= 5; ++k) {
    double s = 0;
    for (Eigen::Index i = 0; i < g.n; ++i) s += w(i) * std::pow(std::abs(g.x(i)), k);
    CHECK(s == doctest::Approx(2 * std::pow(3.0, k + 1) / (k + 1)).epsilon(1e-12));
  }
  // the kink of e^{-|x|} at the origin does not spoil the order
  const auto g2 = Grid<double>::from_half_width(3.0, 0.05);
  const auto w2 = quadrature_weights(g2, Quadrature::gregory);
  auto integral = [](const Grid<double> &gg, const RealVector<double> &ww) {
    double s = 0;
    for (Eigen::Index i = 0; i < gg.n; ++i) s += ww(i) * std::exp(-std::abs(gg.x(i)));
    return s;
  };
  const double exact = 2 * (1 - std::exp(-3.0));
  const double e1 = std::abs(integral(g, w) - exact), e2 = std::abs(integral(g2, w2) - exact);
  CHECK(e1 < 1e-7);
  CHECK(e1 / e2 > 20); // high order
}

TEST_CASE("inner product is linear in the first slot") {
  const auto g = Grid<double>::from_half_width(2.0, 0.1);
  FieldState<double> f(g), h(g);
  for (Eigen::Index i = 0; i < g.n; ++i) {
    f.values.row(i) << std::complex<double>(std::cos(g.x(i)), 1), std::complex<double>(0, g.x(i));
    h.values.row(i) << std::complex<double>(1, g.x(i)), std::complex<double>(2, 0);
  }
  const std::complex<double> c(0.3, -1.2);
  FieldState<double> cf(Field<double>(c * f.values), g);
  CHECK(std::abs(inner(cf, h) - c * inner(f, h)) < 1e-13);
  CHECK(std::abs(inner(f, h) - std::conj(inner(h, f))) < 1e-13);
}

TEST_CASE("complex scalar round trip") {
  const auto g = Grid<double>::from_half_width(1.0, 0.1);
  ComplexVector<double> p(g.n);
  for (Eigen::Index i = 0; i < g.n; ++i) p(i) = std::complex<double>(g.x(i), 1 - g.x(i));
  CHECK((to_complex(from_complex(p, g)) - p).norm() == 0.0);
}
