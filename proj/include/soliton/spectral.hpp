#pragma once

#include "soliton/grid.hpp"
#include "soliton/nonlinearity.hpp"
#include "soliton/solitary.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace soliton {

template <typename Scalar> struct Linearization {
  Scalar omega, C, a, aprime, asecond, alpha, beta;
  std::optional<Scalar> mu;

  // omega is fixed by a = 2 sqrt(omega).
  static Linearization from_values(Scalar a, Scalar aprime, Scalar asecond, Scalar C) {
    if (!(a > 0) || !(C > 0))
      throw std::invalid_argument("linearization: need a(C^2) > 0 and C > 0");
    Linearization lin{a * a / 4, C, a, aprime, asecond, a + aprime * C * C, aprime * C * C, std::nullopt};
    if (lin.beta > a / std::sqrt(Scalar(2)) && lin.beta < a)
      lin.mu = lin.beta / 2 * std::sqrt(a * a - lin.beta * lin.beta);
    return lin;
  }

  static Linearization from(const Nonlinearity<Scalar> &nl, const SolitonParams<Scalar> &p) {
    const Scalar s = p.C * p.C;
    auto lin = from_values(eval_a(nl, s), eval_a(nl, s, 1), eval_a(nl, s, 2), p.C);
    lin.omega = p.omega;
    return lin;
  }

  Scalar scale() const { return alpha * alpha + beta * beta; }
  Scalar dC() const { return 1 / (2 * std::sqrt(omega) * aprime * C); }
};

// Same linearization with the lumped origin coefficient a replaced by the value for which the
// sampled exponential e^{-k|x|}, 2 cosh(k dx) - 2 = omega dx^2, is an exact kernel vector of the
// grid L-. The shift is O(dx^2); without it the Jordan block at 0 splits into a real pair O(dx).
template <typename Scalar> Linearization<Scalar> grid_consistent(Linearization<Scalar> lin, Scalar dx) {
  const Scalar k = std::acosh(1 + lin.omega * dx * dx / 2) / dx;
  const Scalar ad = dx * lin.omega + 2 * (1 - std::exp(-k * dx)) / dx;
  lin.alpha += ad - lin.a;
  lin.a = ad;
  return lin;
}

enum class Side { none, plus_edge, minus_edge };
enum class Which { plus, minus };

template <typename Scalar> struct BranchedFrequency {
  Complex<Scalar> lambda;
  Side side = Side::none;
};

template <typename Scalar> BranchedFrequency<Scalar> at_imag(Scalar nu, Side side = Side::none) {
  return {Complex<Scalar>(0, nu), side};
}

template <typename Scalar> bool on_cut(const Linearization<Scalar> &lin, Complex<Scalar> lambda, Which which) {
  if (std::abs(lambda.real()) > 64 * std::numeric_limits<Scalar>::epsilon() * std::max(Scalar(1), std::abs(lambda)))
    return false;
  return which == Which::plus ? lambda.imag() >= lin.omega : lambda.imag() <= -lin.omega;
}

// k+ = sqrt(-omega - i lambda), k- = sqrt(-omega + i lambda), Im k > 0 off the cut.
// On the cut: k+(lambda+0) = -sqrt(nu - omega), k-(lambda+0) = +sqrt(-omega - nu).
template <typename Scalar>
Complex<Scalar> k_pm(const Linearization<Scalar> &lin, const BranchedFrequency<Scalar> &bf, Which which) {
  const Complex<Scalar> I(0, 1);
  const Complex<Scalar> w = which == Which::plus ? -lin.omega - I * bf.lambda : -lin.omega + I * bf.lambda;
  if (on_cut(lin, bf.lambda, which)) {
    if (bf.side == Side::none)
      throw std::invalid_argument("k_pm: lambda lies on a cut, choose a side");
    const Scalar r = std::sqrt(std::max(Scalar(0), w.real()));
    if (which == Which::plus)
      return bf.side == Side::plus_edge ? -r : r;
    return bf.side == Side::plus_edge ? r : -r;
  }
  return I * std::sqrt(-w);
}

template <typename Scalar>
Complex<Scalar> determinant_D(const Linearization<Scalar> &lin, Complex<Scalar> kp, Complex<Scalar> km) {
  const Complex<Scalar> I(0, 1);
  return Scalar(2) * I * lin.alpha * (kp + km) - Scalar(4) * kp * km + lin.alpha * lin.alpha - lin.beta * lin.beta;
}

template <typename Scalar> Complex<Scalar> determinant_D(const Linearization<Scalar> &lin, const BranchedFrequency<Scalar> &bf) {
  return determinant_D(lin, k_pm(lin, bf, Which::plus), k_pm(lin, bf, Which::minus));
}

// D(i nu) for 0 < nu < omega is real.
template <typename Scalar> Scalar determinant_on_gap(const Linearization<Scalar> &lin, Scalar nu) {
  return determinant_D(lin, at_imag(nu)).real();
}

// Roots of D on the open segment (0, i omega), located by a sign scan and bisection.
template <typename Scalar> std::vector<Scalar> gap_roots(const Linearization<Scalar> &lin, int samples = 10000) {
  std::vector<Scalar> roots;
  const Scalar h = lin.omega / samples;
  Scalar lo = h * Scalar(0.5);
  Scalar flo = determinant_on_gap(lin, lo);
  for (int i = 1; i <= samples; ++i) {
    const Scalar hi = i == samples ? lin.omega * (1 - Scalar(1e-14)) : (Scalar(i) + Scalar(0.5)) * h;
    const Scalar fhi = determinant_on_gap(lin, hi);
    if (flo == Scalar(0)) {
      roots.push_back(lo);
    } else if ((flo < 0) != (fhi < 0) && fhi != Scalar(0)) {
      Scalar a = lo, b = hi, fa = flo;
      for (int it = 0; it < 200 && b - a > 4 * std::numeric_limits<Scalar>::epsilon() * b; ++it) {
        const Scalar m = (a + b) / 2;
        const Scalar fm = determinant_on_gap(lin, m);
        if ((fm < 0) == (fa < 0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      roots.push_back((a + b) / 2);
    }
    lo = hi;
    flo = fhi;
  }
  return roots;
}

// i mu from the closed formula, confirmed by a root search of D on (0, i omega).
template <typename Scalar> std::optional<Complex<Scalar>> discrete_eigenvalue(const Linearization<Scalar> &lin, Scalar tol = Scalar(1e-9)) {
  if (!lin.mu)
    return std::nullopt;
  const Scalar mu = *lin.mu;
  const auto roots = gap_roots(lin);
  bool found = false;
  for (Scalar r : roots) found = found || std::abs(r - mu) <= tol * std::max(Scalar(1), mu);
  if (!found)
    throw numerical_error("discrete_eigenvalue: closed form and root search disagree");
  return Complex<Scalar>(0, mu);
}

enum class SpectralClass { below_window, in_window, above_window, no_eigenvalue };

inline const char *to_string(SpectralClass c) {
  switch (c) {
  case SpectralClass::below_window: return "below_window";
  case SpectralClass::in_window: return "in_window";
  case SpectralClass::above_window: return "above_window";
  default: return "no_eigenvalue";
  }
}

template <typename Scalar> Scalar window_upper(Scalar a) { return a * std::sqrt(Scalar(2)) * (1 + std::sqrt(Scalar(3))) / 4; }

// Classifies beta = a' C^2 against (a/sqrt2, a sqrt2 (1+sqrt3)/4).
template <typename Scalar> SpectralClass spectral_condition(const Linearization<Scalar> &lin) {
  const Scalar lo = lin.a / std::sqrt(Scalar(2));
  const Scalar hi = window_upper(lin.a);
  SpectralClass c;
  if (lin.beta <= 0 || lin.beta >= lin.a)
    c = SpectralClass::no_eigenvalue;
  else if (lin.beta <= lo)
    c = SpectralClass::below_window;
  else if (lin.beta < hi)
    c = SpectralClass::in_window;
  else
    c = SpectralClass::above_window;
  const bool by_mu = lin.mu && lin.omega / 2 < *lin.mu && *lin.mu < lin.omega;
  if ((c == SpectralClass::in_window) != by_mu)
    throw numerical_error("spectral_condition: window test and eigenvalue test disagree");
  return c;
}

template <typename Scalar> Pair<Scalar> v_plus() { return Pair<Scalar>(Complex<Scalar>(1, 0), Complex<Scalar>(0, 1)); }
template <typename Scalar> Pair<Scalar> v_minus() { return Pair<Scalar>(Complex<Scalar>(1, 0), Complex<Scalar>(0, -1)); }

template <typename Scalar> struct DiscreteMode {
  FieldState<Scalar> u, ustar;
  Scalar coefficient; // of e^{ik-|x|} v- relative to e^{ik+|x|} v+
  Scalar rho;         // v+ : v- ratio of u(0), equal to 1/coefficient
  Complex<Scalar> kplus, kminus;
};

template <typename Scalar> Scalar eigen_coefficient(const Linearization<Scalar> &lin) {
  if (!lin.mu)
    throw std::invalid_argument("eigenfunction: no discrete eigenvalue");
  const Scalar km_abs = std::sqrt(lin.omega + *lin.mu);
  const Scalar den = lin.alpha - 2 * km_abs; // 2 i k- + alpha with k- = i sqrt(omega + mu)
  if (den == Scalar(0))
    throw numerical_error("eigenfunction: 2ik- + alpha vanishes");
  return -lin.beta / den;
}

// u(x) = e^{ik+|x|} v+ + c e^{ik-|x|} v- at lambda = i mu.
template <typename Scalar> Pair<Scalar> eigenfunction_at(const Linearization<Scalar> &lin, Scalar x) {
  const Scalar c = eigen_coefficient(lin);
  const Scalar ep = std::exp(-std::sqrt(lin.omega - *lin.mu) * std::abs(x));
  const Scalar em = std::exp(-std::sqrt(lin.omega + *lin.mu) * std::abs(x));
  return Pair<Scalar>(Complex<Scalar>(ep + c * em, 0), Complex<Scalar>(0, ep - c * em));
}

template <typename Scalar> DiscreteMode<Scalar> eigenfunction_u(const Linearization<Scalar> &lin, const Grid<Scalar> &g) {
  const Scalar c = eigen_coefficient(lin);
  DiscreteMode<Scalar> m{FieldState<Scalar>(g), FieldState<Scalar>(g), c, 1 / c,
                         Complex<Scalar>(0, std::sqrt(lin.omega - *lin.mu)), Complex<Scalar>(0, std::sqrt(lin.omega + *lin.mu))};
  for (Eigen::Index i = 0; i < g.n; ++i) {
    const Pair<Scalar> v = eigenfunction_at(lin, g.x(i));
    m.u.values.row(i) = v.transpose();
    m.ustar.values(i, 0) = v(0);
    m.ustar.values(i, 1) = -v(1);
  }
  return m;
}

template <typename Scalar> struct ContinuousMode {
  FieldState<Scalar> tau, s;
  Complex<Scalar> k, D;
};

// tau(x), s(x) at lambda = i nu (+0 side), |nu| > omega.
template <typename Scalar> std::pair<Pair<Scalar>, Pair<Scalar>> continuous_at(const Linearization<Scalar> &lin, Scalar nu, Scalar x) {
  if (!(std::abs(nu) > lin.omega))
    throw std::invalid_argument("continuous_eigenfunctions: need |nu| > omega");
  const Complex<Scalar> I(0, 1);
  const auto bf = at_imag(nu, Side::plus_edge);
  const Complex<Scalar> kp = k_pm(lin, bf, Which::plus), km = k_pm(lin, bf, Which::minus);
  const Complex<Scalar> D = determinant_D(lin, kp, km);
  const bool plus = nu > 0;
  const Complex<Scalar> k = plus ? kp : km, q = plus ? km : kp;
  const Pair<Scalar> va = plus ? v_plus<Scalar>() : v_minus<Scalar>();
  const Pair<Scalar> vb = plus ? v_minus<Scalar>() : v_plus<Scalar>();
  const Scalar ax = std::abs(x);
  const Pair<Scalar> tau = (std::conj(D) * std::exp(I * k * ax) - D * std::exp(-I * k * ax)) * va +
                           Scalar(4) * lin.beta * I * k * std::exp(I * q * ax) * vb;
  const Pair<Scalar> s = std::sin(k * x) * va;
  return {tau, s};
}

template <typename Scalar>
ContinuousMode<Scalar> continuous_eigenfunctions(const Linearization<Scalar> &lin, Scalar nu, const Grid<Scalar> &g) {
  const auto bf = at_imag(nu, Side::plus_edge);
  const Complex<Scalar> kp = k_pm(lin, bf, Which::plus), km = k_pm(lin, bf, Which::minus);
  ContinuousMode<Scalar> m{FieldState<Scalar>(g), FieldState<Scalar>(g), nu > 0 ? kp : km, determinant_D(lin, kp, km)};
  for (Eigen::Index i = 0; i < g.n; ++i) {
    const auto [t, s] = continuous_at(lin, nu, g.x(i));
    m.tau.values.row(i) = t.transpose();
    m.s.values.row(i) = s.transpose();
  }
  return m;
}

enum class KernelForm { gamma_plus_p, decomposition };

template <typename Scalar> void guard_pole(const Linearization<Scalar> &lin, Complex<Scalar> D) {
  if (std::abs(D) < Scalar(1e-8) * lin.scale())
    throw numerical_error("resolvent_kernel: lambda too close to a pole of the resolvent");
}

// Closed-form kernel of (C - lambda)^{-1}.
template <typename Scalar>
Block2<Scalar> resolvent_kernel(const Linearization<Scalar> &lin, const BranchedFrequency<Scalar> &bf, Scalar x, Scalar y,
                                KernelForm form = KernelForm::gamma_plus_p) {
  const Complex<Scalar> I(0, 1);
  const Complex<Scalar> kp = k_pm(lin, bf, Which::plus), km = k_pm(lin, bf, Which::minus);
  const Complex<Scalar> D = determinant_D(lin, kp, km);
  guard_pole(lin, D);
  const Scalar ax = std::abs(x), ay = std::abs(y), axy = std::abs(x - y);
  const Complex<Scalar> Ep = std::exp(I * kp * axy) - std::exp(I * kp * (ax + ay));
  const Complex<Scalar> Em = std::exp(I * km * axy) - std::exp(I * km * (ax + ay));
  const Complex<Scalar> epx = std::exp(I * kp * ax), emx = std::exp(I * km * ax);
  const Complex<Scalar> epy = std::exp(I * kp * ay), emy = std::exp(I * km * ay);
  const Scalar al = lin.alpha, be = lin.beta;
  Block2<Scalar> R;
  if (form == KernelForm::gamma_plus_p) {
    Block2<Scalar> A, B, X, M, Y;
    A << Scalar(1) / (Scalar(4) * kp), Scalar(-1) / (Scalar(4) * km), I / (Scalar(4) * kp), I / (Scalar(4) * km);
    B << Ep, -I * Ep, Em, I * Em;
    X << epx, emx, I * epx, -I * emx;
    M << I * al - Scalar(2) * km, I * be, -I * be, -I * al + Scalar(2) * kp;
    Y << epy, -I * epy, emy, I * emy;
    R = A * B + X * M * Y / (Scalar(2) * D);
  } else {
    Block2<Scalar> t12, t3, t4, t56;
    t12 << 1, -I, I, 1;
    t3 << 1, I, I, -1;
    t4 << 1, -I, -I, -1;
    t56 << 1, I, -I, 1;
    const Complex<Scalar> A1 = Ep / (Scalar(4) * kp);
    const Complex<Scalar> A2 = (I * al - Scalar(2) * km) / (Scalar(2) * D) * epx * epy;
    const Complex<Scalar> A3 = I * be / (Scalar(2) * D) * epx * emy;
    const Complex<Scalar> A4 = -I * be / (Scalar(2) * D) * emx * epy;
    const Complex<Scalar> A5 = (-I * al + Scalar(2) * kp) / (Scalar(2) * D) * emx * emy;
    const Complex<Scalar> A6 = -Em / (Scalar(4) * km);
    R = (A1 + A2) * t12 + A3 * t3 + A4 * t4 + (A5 + A6) * t56;
  }
  return R;
}

// (R g)(x) = int R(lambda, x, y) g(y) dy by quadrature over the support of g.
template <typename Scalar>
FieldState<Scalar> resolvent_apply(const Linearization<Scalar> &lin, const BranchedFrequency<Scalar> &bf, const FieldState<Scalar> &g,
                                   Quadrature q = Quadrature::trapezoid, Scalar support_tol = Scalar(0)) {
  const auto w = quadrature_weights(g.grid, q);
  std::vector<Eigen::Index> support;
  const Scalar gmax = g.values.rowwise().norm().maxCoeff();
  for (Eigen::Index j = 0; j < g.grid.n; ++j)
    if (g.values.row(j).norm() > support_tol * gmax) support.push_back(j);
  FieldState<Scalar> out(g.grid);
  for (Eigen::Index i = 0; i < g.grid.n; ++i) {
    Pair<Scalar> acc = Pair<Scalar>::Zero();
    for (Eigen::Index j : support)
      acc += w(j) * resolvent_kernel(lin, bf, g.grid.x(i), g.grid.x(j)) * g.values.row(j).transpose();
    out.values.row(i) = acc.transpose();
  }
  return out;
}

// Grid version of C = [[0, D2], [-D1, 0]], delta lumped at the origin with weight 1/dx.
template <typename Scalar> FieldState<Scalar> apply_C(const FieldState<Scalar> &chi, const Linearization<Scalar> &lin) {
  const auto &g = chi.grid;
  const Scalar h2 = g.dx * g.dx;
  Field<Scalar> Bchi(g.n, 2);
  for (Eigen::Index i = 0; i < g.n; ++i) {
    for (int k = 0; k < 2; ++k) {
      const Complex<Scalar> left = i > 0 ? chi.values(i - 1, k) : Complex<Scalar>(0);
      const Complex<Scalar> right = i + 1 < g.n ? chi.values(i + 1, k) : Complex<Scalar>(0);
      Bchi(i, k) = -(left - Scalar(2) * chi.values(i, k) + right) / h2 + lin.omega * chi.values(i, k);
    }
  }
  const Eigen::Index c = g.center();
  Bchi(c, 0) -= (lin.a + 2 * lin.beta) / g.dx * chi.values(c, 0);
  Bchi(c, 1) -= lin.a / g.dx * chi.values(c, 1);
  FieldState<Scalar> out(g);
  out.values.col(0) = Bchi.col(1);
  out.values.col(1) = -Bchi.col(0);
  return out;
}

// Omega(psi, eta) = <psi, j eta>.
template <typename Scalar>
Complex<Scalar> symplectic_form(const FieldState<Scalar> &psi, const FieldState<Scalar> &eta, Quadrature q = Quadrature::gregory) {
  require_same_grid(psi, eta);
  return inner<Scalar>(psi.values, apply_j(eta.values), quadrature_weights(psi.grid, q));
}

// Sampled Psi, d_omega Psi, u, u* on one grid with the pairings the projections need.
template <typename Scalar> struct SpectralBasis {
  Grid<Scalar> grid;
  RealVector<Scalar> weights;
  FieldState<Scalar> Psi, jPsi, dPsi, jdPsi;
  std::optional<DiscreteMode<Scalar>> mode;
  Complex<Scalar> Delta;             // <Psi, d_omega Psi>
  Complex<Scalar> kappa, kappa_star; // <u, ju>, <u*, ju*>

  SpectralBasis(const Linearization<Scalar> &lin, const Grid<Scalar> &g, Quadrature q = Quadrature::gregory)
      : grid(g), weights(quadrature_weights(g, q)), Psi(g), jPsi(g), dPsi(g), jdPsi(g) {
    const Scalar s = std::sqrt(lin.omega);
    const Scalar dC = lin.dC();
    for (Eigen::Index i = 0; i < g.n; ++i) {
      const Scalar ax = std::abs(g.x(i));
      const Scalar e = std::exp(-s * ax);
      Psi.values(i, 0) = lin.C * e;
      dPsi.values(i, 0) = (dC - lin.C * ax / (2 * s)) * e;
    }
    jPsi = apply_j(Psi);
    jdPsi = apply_j(dPsi);
    Delta = inner<Scalar>(Psi.values, dPsi.values, weights);
    if (std::abs(Delta) < Scalar(1e-12))
      throw numerical_error("projection: <Psi, d_omega Psi> vanishes");
    if (lin.mu) {
      mode = eigenfunction_u(lin, g);
      kappa = inner<Scalar>(mode->u.values, apply_j(mode->u.values), weights);
      kappa_star = inner<Scalar>(mode->ustar.values, apply_j(mode->ustar.values), weights);
    }
  }

  Complex<Scalar> pair(const FieldState<Scalar> &f, const FieldState<Scalar> &g) const {
    return inner<Scalar>(f.values, g.values, weights);
  }

  // Coefficient z of u in P1 psi.
  Complex<Scalar> z_of(const FieldState<Scalar> &psi) const {
    return inner<Scalar>(psi.values, apply_j(mode->u.values), weights) / kappa;
  }
};

enum class Projector { P0, P1, Pc };

template <typename Scalar>
FieldState<Scalar> project(const FieldState<Scalar> &psi, const SpectralBasis<Scalar> &b, Projector which) {
  require_same_grid(psi, b.Psi);
  auto p0 = [&] {
    const Complex<Scalar> c1 = b.pair(psi, b.jdPsi) / b.Delta;
    const Complex<Scalar> c2 = b.pair(psi, b.Psi) / b.Delta;
    return Field<Scalar>(c1 * b.jPsi.values + c2 * b.dPsi.values);
  };
  auto p1 = [&] {
    if (!b.mode)
      throw std::invalid_argument("project: no discrete eigenvalue for P1");
    const auto &m = *b.mode;
    const Complex<Scalar> c3 = inner<Scalar>(psi.values, apply_j(m.u.values), b.weights) / b.kappa;
    const Complex<Scalar> c4 = inner<Scalar>(psi.values, apply_j(m.ustar.values), b.weights) / b.kappa_star;
    return Field<Scalar>(c3 * m.u.values + c4 * m.ustar.values);
  };
  switch (which) {
  case Projector::P0: return FieldState<Scalar>(p0(), psi.grid);
  case Projector::P1: return FieldState<Scalar>(p1(), psi.grid);
  default: return FieldState<Scalar>(Field<Scalar>(psi.values - p0() - p1()), psi.grid);
  }
}

template <typename Scalar>
FieldState<Scalar> project(const FieldState<Scalar> &psi, const Linearization<Scalar> &lin, Projector which) {
  return project(psi, SpectralBasis<Scalar>(lin, psi.grid), which);
}

} // namespace soliton
