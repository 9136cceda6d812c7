#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace soliton {

template <typename Scalar> using Complex = std::complex<Scalar>;
template <typename Scalar> using Pair = Eigen::Matrix<std::complex<Scalar>, 2, 1>;
template <typename Scalar> using Block2 = Eigen::Matrix<std::complex<Scalar>, 2, 2>;
template <typename Scalar> using Field = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 2>;
template <typename Scalar> using RealVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar> using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a run leaves its validity regime (charge drift, Picard failure, Newton divergence).
struct guard_trip : numerical_error {
  using numerical_error::numerical_error;
};

struct grid_mismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Uniform grid on [-L, L] with an odd node count, so x = 0 is the node `center()`.
template <typename Scalar> struct Grid {
  Eigen::Index n = 1;
  Scalar dx = 1;

  static Grid from_half_width(Scalar L, Scalar dx) {
    if (!(dx > 0) || !(L > 0))
      throw std::invalid_argument("grid: dx and L must be positive");
    const auto m = static_cast<Eigen::Index>(std::llround(L / dx));
    if (m < 1)
      throw std::invalid_argument("grid: L must exceed dx");
    return Grid{2 * m + 1, dx};
  }

  Eigen::Index center() const { return (n - 1) / 2; }
  Scalar half_width() const { return dx * Scalar(n - 1) / 2; }
  Scalar x(Eigen::Index i) const { return Scalar(i - center()) * dx; }

  RealVector<Scalar> nodes() const {
    RealVector<Scalar> xs(n);
    for (Eigen::Index i = 0; i < n; ++i) xs(i) = x(i);
    return xs;
  }

  bool operator==(const Grid &o) const { return n == o.n && dx == o.dx; }
};

template <typename Scalar> struct FieldState {
  Field<Scalar> values;
  Grid<Scalar> grid;

  FieldState() = default;
  explicit FieldState(const Grid<Scalar> &g) : values(Field<Scalar>::Zero(g.n, 2)), grid(g) {}
  FieldState(Field<Scalar> v, const Grid<Scalar> &g) : values(std::move(v)), grid(g) { validate(); }

  void validate() const {
    if (grid.n % 2 == 0)
      throw std::invalid_argument("field: node count must be odd");
    if (values.rows() != grid.n)
      throw std::invalid_argument("field: value count does not match grid");
    if (!values.allFinite())
      throw numerical_error("field: non-finite values");
  }

  Pair<Scalar> at_origin() const { return values.row(grid.center()).transpose(); }
};

template <typename Scalar> inline void require_same_grid(const FieldState<Scalar> &a, const FieldState<Scalar> &b) {
  if (!(a.grid == b.grid))
    throw grid_mismatch("fields live on different grids");
}

// j = [[0,-1],[1,0]] acting pointwise.
template <typename Derived> auto apply_j(const Eigen::MatrixBase<Derived> &f) {
  using T = typename Derived::Scalar;
  Eigen::Matrix<T, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime> out(f.rows(), f.cols());
  if constexpr (Derived::ColsAtCompileTime == 1) {
    out(0) = -f(1);
    out(1) = f(0);
  } else {
    out.col(0) = -f.col(1);
    out.col(1) = f.col(0);
  }
  return out;
}

template <typename Scalar> FieldState<Scalar> apply_j(const FieldState<Scalar> &f) {
  return FieldState<Scalar>(apply_j(f.values), f.grid);
}

enum class Quadrature { trapezoid, gregory };

// Gregory end corrections, exact for polynomials up to degree 5 on each panel end.
template <typename Scalar> constexpr Scalar gregory_end[5] = {Scalar(95) / 288, Scalar(317) / 240, Scalar(23) / 30,
                                                              Scalar(793) / 720, Scalar(157) / 160};

// Weights include dx. Gregory treats [-L,0] and [0,L] as separate panels so the kink at
// the origin sits on a panel end.
template <typename Scalar> RealVector<Scalar> quadrature_weights(const Grid<Scalar> &g, Quadrature q) {
  RealVector<Scalar> w = RealVector<Scalar>::Constant(g.n, g.dx);
  if (q == Quadrature::trapezoid) {
    w(0) *= Scalar(0.5);
    w(g.n - 1) *= Scalar(0.5);
    return w;
  }
  const Eigen::Index m = g.center();
  if (m < 10)
    throw std::invalid_argument("gregory quadrature needs at least 10 intervals per half-line");
  auto panel = [&](Eigen::Index lo, Eigen::Index hi, RealVector<Scalar> &acc) {
    for (Eigen::Index i = lo; i <= hi; ++i) acc(i) += g.dx;
    for (int k = 0; k < 5; ++k) {
      acc(lo + k) += g.dx * (gregory_end<Scalar>[k] - 1);
      acc(hi - k) += g.dx * (gregory_end<Scalar>[k] - 1);
    }
  };
  w.setZero();
  panel(0, m, w);
  panel(m, g.n - 1, w);
  return w;
}

// <f, g> = sum_k integral f_k conj(g_k), linear in the first slot.
template <typename Scalar, typename A, typename B>
Complex<Scalar> inner(const Eigen::MatrixBase<A> &f, const Eigen::MatrixBase<B> &g, const RealVector<Scalar> &w) {
  Complex<Scalar> s(0);
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    Complex<Scalar> row(0);
    for (Eigen::Index k = 0; k < f.cols(); ++k) row += f(i, k) * std::conj(g(i, k));
    s += w(i) * row;
  }
  return s;
}

template <typename Scalar>
Complex<Scalar> inner(const FieldState<Scalar> &f, const FieldState<Scalar> &g, Quadrature q = Quadrature::gregory) {
  require_same_grid(f, g);
  return inner<Scalar>(f.values, g.values, quadrature_weights(f.grid, q));
}

// Real-form field (psi1, psi2) <-> complex scalar psi1 + i psi2.
template <typename Scalar> ComplexVector<Scalar> to_complex(const FieldState<Scalar> &f) {
  const Complex<Scalar> i(0, 1);
  return f.values.col(0) + i * f.values.col(1);
}

template <typename Scalar> FieldState<Scalar> from_complex(const ComplexVector<Scalar> &p, const Grid<Scalar> &g) {
  Field<Scalar> v(g.n, 2);
  v.col(0) = p.real().template cast<Complex<Scalar>>();
  v.col(1) = p.imag().template cast<Complex<Scalar>>();
  return FieldState<Scalar>(std::move(v), g);
}

} // namespace soliton
