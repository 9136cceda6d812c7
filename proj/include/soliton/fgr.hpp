#pragma once

#include "soliton/spectral.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace soliton {

// (u, v) = u1 v1 + u2 v2, no conjugation.
template <typename Scalar> Complex<Scalar> bilinear(const Pair<Scalar> &u, const Pair<Scalar> &v) {
  return u(0) * v(0) + u(1) * v(1);
}

// Coefficient of delta(x) in the symmetric bilinear form E2[X, Y], Psi(0) = (C, 0).
template <typename Scalar> Pair<Scalar> E2_at_origin(const Linearization<Scalar> &lin, const Pair<Scalar> &X, const Pair<Scalar> &Y) {
  const Pair<Scalar> Psi0(Complex<Scalar>(lin.C), Complex<Scalar>(0));
  const Complex<Scalar> px = bilinear(Psi0, X), py = bilinear(Psi0, Y);
  return lin.aprime * bilinear(X, Y) * Psi0 + Scalar(2) * lin.asecond * px * py * Psi0 + lin.aprime * (py * X + px * Y);
}

template <typename Scalar> struct PairingScalars {
  Scalar nu, kappa, rho, c_nu;
  Complex<Scalar> sigma;
};

template <typename Scalar> Scalar c_from(Scalar kappa, Scalar rho) {
  return -2 * (2 * kappa * rho + 2 * rho + kappa * rho * rho + 1) / ((kappa + 1) * (1 + rho) * (1 + rho));
}

template <typename Scalar> PairingScalars<Scalar> pairing_scalars(const Linearization<Scalar> &lin) {
  if (!lin.mu)
    throw std::invalid_argument("fgr: no discrete eigenvalue");
  const Scalar mu = *lin.mu;
  if (!(2 * mu > lin.omega))
    throw std::invalid_argument("fgr: 2 mu must lie in the continuous spectrum");
  const Complex<Scalar> I(0, 1);
  const auto bf = at_imag(2 * mu, Side::plus_edge);
  const Complex<Scalar> kp = k_pm(lin, bf, Which::plus);
  const Complex<Scalar> km = k_pm(lin, bf, Which::minus);
  const Scalar kappa = (-(lin.alpha + Scalar(2) * I * km) / lin.beta).real();
  const Scalar rho = (lin.alpha - 2 * std::sqrt(lin.omega + mu)) / -lin.beta;
  return {lin.beta / lin.a, kappa, rho, c_from(kappa, rho), Scalar(4) * lin.beta * I * kp};
}

template <typename Scalar> Complex<Scalar> fgr_closed_form(const Linearization<Scalar> &lin, const PairingScalars<Scalar> &e) {
  const Scalar C = lin.C, a1 = lin.aprime, a2 = lin.asecond, r = e.rho, k = e.kappa;
  return e.sigma * (k + 1) * (a1 * 4 * r * C + 2 * a2 * C * C * C * (r + 1) * (r + 1) + 2 * a1 * C * (r + 1) * (r + 1)) +
         e.sigma * (k - 1) * Scalar(2) * a1 * C * (r * r - 1);
}

template <typename Scalar> struct FgrPairing {
  Complex<Scalar> value;     // <tau+(2i mu), E2[u, u]> with the unit-coefficient eigenfunction
  Complex<Scalar> rescaled;  // same pairing with u(0) = rho v+ + v-
  Complex<Scalar> closed;    // closed form in the rho v+ + v- normalization
  Scalar threshold;
};

// Direct pairing at x = 0 checked against the closed form.
template <typename Scalar>
FgrPairing<Scalar> fgr_pairing(const Linearization<Scalar> &lin, Complex<Scalar> scale = Complex<Scalar>(1), Scalar tol = Scalar(1e-9)) {
  const auto e = pairing_scalars(lin);
  const Pair<Scalar> tau0 = continuous_at(lin, 2 * *lin.mu, Scalar(0)).first;
  auto pairing = [&](const Pair<Scalar> &u0) {
    const Pair<Scalar> E = E2_at_origin(lin, u0, u0);
    return tau0(0) * std::conj(E(0)) + tau0(1) * std::conj(E(1));
  };
  const Pair<Scalar> u0 = eigenfunction_at(lin, Scalar(0));
  const Complex<Scalar> value = pairing(Pair<Scalar>(scale * u0));
  const Complex<Scalar> rescaled = pairing(Pair<Scalar>(e.rho * u0));
  const Complex<Scalar> closed = fgr_closed_form(lin, e);
  const Scalar thr = Scalar(1e-10) * std::abs(e.sigma) *
                     std::max({Scalar(1), std::abs(lin.aprime * lin.C), std::abs(lin.asecond * lin.C * lin.C * lin.C)});
  const Scalar ref = std::max(std::abs(closed), thr * Scalar(1e10));
  if (std::abs(rescaled - closed) > tol * ref)
    throw numerical_error("fgr: direct pairing and closed form disagree");
  return {value, rescaled, closed, thr};
}

template <typename Scalar> Complex<Scalar> fgr_inner_product(const Linearization<Scalar> &lin) { return fgr_pairing(lin).value; }

template <typename Scalar> struct FgrReport {
  Scalar C = 0, omega = 0;
  SpectralClass klass = SpectralClass::no_eigenvalue;
  Scalar nu = 0, kappa = 0, rho = 0, c_nu = 0;
  Complex<Scalar> fgr_lhs{};
  bool holds = false;
  Scalar margin = 0;        // |a'' - c(nu) a'/C^2|
  Scalar signed_margin = 0; // a'' - c(nu) a'/C^2
  Scalar re_iK = std::numeric_limits<Scalar>::quiet_NaN();
  bool evaluated = false;
};

template <typename Scalar> Scalar margin_tolerance(const Linearization<Scalar> &lin) {
  return Scalar(1e-10) * std::max({Scalar(1), std::abs(lin.aprime) / (lin.C * lin.C), std::abs(lin.asecond)});
}

template <typename Scalar> struct DampingReport {
  Scalar delta = 0;        // <u, ju> / i by quadrature
  Scalar delta_closed = 0; // closed-form exponential integrals
  Scalar re_iK = 0;
  Complex<Scalar> kplus{}, D{};
  Scalar fgr_abs = 0;
  Scalar im_pairing = 0; // Im <R(2i mu + 0) alpha, j alpha>
};

// <u, ju> / i for u = scale * u_def, in closed form.
template <typename Scalar> Scalar delta_closed(const Linearization<Scalar> &lin, Complex<Scalar> scale = Complex<Scalar>(1)) {
  const Scalar c = eigen_coefficient(lin);
  const Scalar rp = std::sqrt(lin.omega - *lin.mu), rm = std::sqrt(lin.omega + *lin.mu);
  return std::norm(scale) * 2 * (1 / rp - c * c / rm);
}

// delta by quadrature on a grid long enough that the slow tail is below 1e-14.
template <typename Scalar> Scalar delta_quadrature(const Linearization<Scalar> &lin, Complex<Scalar> scale = Complex<Scalar>(1)) {
  const Scalar rp = std::sqrt(lin.omega - *lin.mu), rm = std::sqrt(lin.omega + *lin.mu);
  const Scalar L = 40 / rp;
  const Scalar dx = std::max(std::min(Scalar(0.02), Scalar(0.05) / rm), L / Scalar(1e6));
  const auto g = Grid<Scalar>::from_half_width(L, dx);
  auto m = eigenfunction_u(lin, g);
  m.u.values *= scale;
  return (symplectic_form(m.u, m.u) / Complex<Scalar>(0, 1)).real();
}

// Re(iK) = (2/delta) |<tau+, E2[u,u]>|^2 / (16 k+(2i mu+0) |D(2i mu+0)|^2).
template <typename Scalar>
DampingReport<Scalar> damping_coefficient(const Linearization<Scalar> &lin, Complex<Scalar> scale = Complex<Scalar>(1),
                                          bool quadrature = true) {
  DampingReport<Scalar> r;
  const auto bf = at_imag(2 * *lin.mu, Side::plus_edge);
  r.kplus = k_pm(lin, bf, Which::plus);
  r.D = determinant_D(lin, bf);
  const auto p = fgr_pairing(lin, scale);
  r.fgr_abs = std::abs(p.value);
  r.delta_closed = delta_closed(lin, scale);
  r.delta = quadrature ? delta_quadrature(lin, scale) : r.delta_closed;
  if (std::abs(r.delta - r.delta_closed) > Scalar(1e-8) * std::abs(r.delta_closed))
    throw numerical_error("damping: quadrature and closed-form delta disagree");
  if (std::abs(p.rescaled) <= p.threshold) {
    r.re_iK = 0;
    return r;
  }
  r.im_pairing = r.fgr_abs * r.fgr_abs / (16 * r.kplus.real() * std::norm(r.D));
  r.re_iK = 2 / r.delta * r.im_pairing;
  return r;
}

// Decay rate of y = |z|^2 under y' = 2 Re(iK) y^2.
template <typename Scalar> Scalar predicted_lambda(Scalar re_iK, Scalar y0) { return -2 * re_iK * y0; }

template <typename Scalar> FgrReport<Scalar> fgr_report(const Nonlinearity<Scalar> &nl, Scalar C, bool with_damping = true) {
  FgrReport<Scalar> r;
  r.C = C;
  const Scalar a = eval_a(nl, C * C);
  if (!(a > 0))
    return r;
  r.omega = a * a / 4;
  const auto lin = Linearization<Scalar>::from_values(a, eval_a(nl, C * C, 1), eval_a(nl, C * C, 2), C);
  r.klass = spectral_condition(lin);
  r.nu = lin.beta / lin.a;
  if (r.klass != SpectralClass::in_window)
    return r;
  const auto e = pairing_scalars(lin);
  r.kappa = e.kappa;
  r.rho = e.rho;
  r.c_nu = e.c_nu;
  const auto p = fgr_pairing(lin);
  r.fgr_lhs = p.value;
  r.signed_margin = lin.asecond - e.c_nu * lin.aprime / (C * C);
  r.margin = std::abs(r.signed_margin);
  r.holds = std::abs(p.rescaled) > p.threshold;
  r.evaluated = true;
  if (with_damping)
    r.re_iK = r.holds ? damping_coefficient(lin, Complex<Scalar>(1), false).re_iK : Scalar(0);
  return r;
}

template <typename Scalar> struct FgrScan {
  std::vector<FgrReport<Scalar>> rows;
  std::vector<Scalar> zero_crossings; // values of C where the FGR margin changes sign
};

template <typename Scalar> FgrScan<Scalar> fgr_scan(const Nonlinearity<Scalar> &nl, const std::vector<Scalar> &Cs, Scalar tol = Scalar(1e-10)) {
  FgrScan<Scalar> out;
  for (Scalar C : Cs) out.rows.push_back(fgr_report(nl, C));
  auto margin_at = [&](Scalar C) { return fgr_report(nl, C, false).signed_margin; };
  for (std::size_t i = 0; i + 1 < out.rows.size(); ++i) {
    const auto &l = out.rows[i], &h = out.rows[i + 1];
    if (!l.evaluated || !h.evaluated)
      continue;
    if (l.signed_margin == Scalar(0)) {
      out.zero_crossings.push_back(l.C);
      continue;
    }
    if ((l.signed_margin < 0) == (h.signed_margin < 0) || h.signed_margin == Scalar(0))
      continue;
    Scalar a = l.C, b = h.C, fa = l.signed_margin;
    while (b - a > tol) {
      const Scalar m = (a + b) / 2;
      const Scalar fm = margin_at(m);
      if ((fm < 0) == (fa < 0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    out.zero_crossings.push_back((a + b) / 2);
  }
  if (!out.rows.empty() && out.rows.back().evaluated && out.rows.back().signed_margin == Scalar(0))
    out.zero_crossings.push_back(out.rows.back().C);
  return out;
}

} // namespace soliton
