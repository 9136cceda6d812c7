#pragma once

#include "soliton/grid.hpp"
#include "soliton/nonlinearity.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace soliton {

template <typename Scalar> struct SolitonParams {
  Scalar C = 1;
  Scalar omega = Scalar(0.25);
  Scalar theta = 0;

  void validate(const Nonlinearity<Scalar> &nl, Scalar tol = Scalar(1e-12)) const {
    const Scalar a = eval_a(nl, C * C);
    if (!(C > 0) || !(omega > 0))
      throw std::invalid_argument("soliton: C and omega must be positive");
    if (!(a > 0))
      throw std::invalid_argument("soliton: a(C^2) must be positive");
    if (std::abs(std::sqrt(omega) - a / 2) > tol * std::max(Scalar(1), a))
      throw std::invalid_argument("soliton: sqrt(omega) != a(C^2)/2");
  }
};

namespace detail {

template <typename Scalar> using Poly = std::vector<Scalar>;

template <typename Scalar> void trim(Poly<Scalar> &p) {
  Scalar scale(0);
  for (Scalar c : p) scale = std::max(scale, std::abs(c));
  while (p.size() > 1 && std::abs(p.back()) <= scale * std::numeric_limits<Scalar>::epsilon() * 64) p.pop_back();
}

template <typename Scalar> Scalar horner(const Poly<Scalar> &p, Scalar x) {
  Scalar acc(0);
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

template <typename Scalar> Poly<Scalar> derivative(const Poly<Scalar> &p) {
  if (p.size() <= 1) return {Scalar(0)};
  Poly<Scalar> d(p.size() - 1);
  for (std::size_t k = 1; k < p.size(); ++k) d[k - 1] = Scalar(k) * p[k];
  return d;
}

// Remainder of p / q.
template <typename Scalar> Poly<Scalar> remainder(Poly<Scalar> p, const Poly<Scalar> &q) {
  const std::size_t dq = q.size() - 1;
  while (p.size() - 1 >= dq && p.size() > 1) {
    const Scalar f = p.back() / q.back();
    const std::size_t shift = p.size() - 1 - dq;
    for (std::size_t k = 0; k <= dq; ++k) p[k + shift] -= f * q[k];
    p.pop_back();
    if (dq == 0) break;
  }
  trim(p);
  return p;
}

template <typename Scalar> std::vector<Poly<Scalar>> sturm_sequence(const Poly<Scalar> &p) {
  std::vector<Poly<Scalar>> seq{p, derivative(p)};
  while (seq.back().size() > 1) {
    Poly<Scalar> r = remainder(seq[seq.size() - 2], seq.back());
    for (Scalar &c : r) c = -c;
    if (r.size() == 1 && r[0] == Scalar(0)) break;
    seq.push_back(std::move(r));
  }
  return seq;
}

template <typename Scalar> int sign_changes(const std::vector<Poly<Scalar>> &seq, Scalar x) {
  int changes = 0;
  int last = 0;
  for (const auto &q : seq) {
    const Scalar v = horner(q, x);
    const int s = (v > 0) - (v < 0);
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

} // namespace detail

// Distinct real roots of p in (lo, hi], isolated with a Sturm sequence and bisected to `tol`.
template <typename Scalar>
std::vector<Scalar> real_roots(std::vector<Scalar> p, Scalar lo, Scalar hi, Scalar tol = Scalar(1e-13)) {
  detail::trim(p);
  if (p.size() == 1) {
    if (p[0] == Scalar(0))
      throw numerical_error("real_roots: zero polynomial has no isolated roots");
    return {};
  }
  const auto seq = detail::sturm_sequence(p);
  std::vector<Scalar> roots;
  struct Span {
    Scalar lo, hi;
    int vlo, vhi;
  };
  std::vector<Span> stack{{lo, hi, detail::sign_changes(seq, lo), detail::sign_changes(seq, hi)}};
  while (!stack.empty()) {
    Span s = stack.back();
    stack.pop_back();
    const int count = s.vlo - s.vhi;
    if (count <= 0) continue;
    if (s.hi - s.lo <= tol * std::max(Scalar(1), std::abs(s.hi))) {
      roots.push_back((s.lo + s.hi) / 2);
      continue;
    }
    const Scalar mid = (s.lo + s.hi) / 2;
    const int vm = detail::sign_changes(seq, mid);
    stack.push_back({mid, s.hi, vm, s.vhi});
    stack.push_back({s.lo, mid, s.vlo, vm});
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

template <typename Scalar>
std::vector<Scalar> amplitudes_for_frequency(const Nonlinearity<Scalar> &nl, Scalar omega) {
  if (!(omega > 0))
    throw std::invalid_argument("amplitudes_for_frequency: omega must be positive");
  std::vector<Scalar> p = nl.coeffs;
  p[0] -= 2 * std::sqrt(omega);
  detail::trim(p);
  if (p.size() == 1)
    return {};
  // Cauchy bound on the positive roots.
  Scalar bound(1);
  for (std::size_t k = 0; k + 1 < p.size(); ++k) bound = std::max(bound, 1 + std::abs(p[k] / p.back()));
  std::vector<Scalar> cs;
  for (Scalar s : real_roots(p, Scalar(0), bound)) {
    if (s > 0 && eval_a(nl, s) > 0) cs.push_back(std::sqrt(s));
  }
  return cs;
}

// dC/domega and d^2C/domega^2 along the branch a(C^2) = 2 sqrt(omega).
template <typename Scalar> struct BranchDerivatives {
  Scalar dC;
  Scalar d2C;
};

template <typename Scalar> BranchDerivatives<Scalar> branch_derivatives(const Nonlinearity<Scalar> &nl, const SolitonParams<Scalar> &p) {
  const Scalar s = std::sqrt(p.omega);
  const Scalar c2 = p.C * p.C;
  const Scalar a1 = eval_a(nl, c2, 1);
  if (a1 == Scalar(0))
    throw numerical_error("a'(C^2) = 0: the branch C(omega) is not locally unique");
  const Scalar a2 = eval_a(nl, c2, 2);
  const Scalar dC = 1 / (2 * s * a1 * p.C);
  const Scalar d2C = -dC * dC * (a1 * p.C / s + 4 * s * a2 * c2 * dC + 2 * s * a1 * dC);
  return {dC, d2C};
}

template <typename Scalar> Scalar charge_derivative(const Nonlinearity<Scalar> &nl, const SolitonParams<Scalar> &p) {
  const Scalar a1 = eval_a(nl, p.C * p.C, 1);
  if (a1 == Scalar(0))
    throw numerical_error("charge_derivative: a'(C^2) = 0");
  return 1 / (p.omega * a1) - p.C * p.C / (2 * std::pow(p.omega, Scalar(1.5)));
}

// d^k/domega^k of C(omega) exp(-sqrt(omega)|x|) for k = 0, 1, 2.
template <typename Scalar>
RealVector<Scalar> soliton_profile(const Nonlinearity<Scalar> &nl, const SolitonParams<Scalar> &p, const Grid<Scalar> &g,
                                   int order = 0) {
  const Scalar s = std::sqrt(p.omega);
  const RealVector<Scalar> ax = g.nodes().array().abs();
  const RealVector<Scalar> e = (-s * ax.array()).exp();
  if (order == 0)
    return p.C * e;
  const auto d = branch_derivatives(nl, p);
  if (order == 1)
    return ((d.dC - p.C * ax.array() / (2 * s)) * e.array()).matrix();
  if (order == 2)
    return ((d.d2C - d.dC * ax.array() / s + p.C * ax.array() / (4 * s * s * s) +
             p.C * ax.array().square() / (4 * s * s)) *
            e.array())
        .matrix();
  throw std::invalid_argument("soliton_profile: order must be 0, 1 or 2");
}

template <typename Scalar> FieldState<Scalar> soliton_field(const SolitonParams<Scalar> &p, const Grid<Scalar> &g) {
  const Scalar s = std::sqrt(p.omega);
  FieldState<Scalar> f(g);
  for (Eigen::Index i = 0; i < g.n; ++i) {
    const Scalar v = p.C * std::exp(-s * std::abs(g.x(i)));
    f.values(i, 0) = v * std::cos(p.theta);
    f.values(i, 1) = v * std::sin(p.theta);
  }
  return f;
}

// Embeds a real profile as (profile, 0).
template <typename Scalar> FieldState<Scalar> real_field(const RealVector<Scalar> &r, const Grid<Scalar> &g) {
  FieldState<Scalar> f(g);
  f.values.col(0) = r.template cast<Complex<Scalar>>();
  return f;
}

} // namespace soliton
