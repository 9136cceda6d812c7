#pragma once

#include "soliton/grid.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace soliton {

// a(s) = sum_k coeffs[k] s^k.
template <typename Scalar> struct Nonlinearity {
  std::vector<Scalar> coeffs;

  Nonlinearity() = default;
  explicit Nonlinearity(std::vector<Scalar> c) : coeffs(std::move(c)) {
    while (coeffs.size() > 1 && coeffs.back() == Scalar(0)) coeffs.pop_back();
    if (coeffs.empty()) coeffs.push_back(Scalar(0));
  }

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  bool operator==(const Nonlinearity &o) const { return coeffs == o.coeffs; }
};

template <typename Scalar> Scalar eval_a(const Nonlinearity<Scalar> &nl, Scalar s, int order = 0) {
  if (order < 0 || order > 3)
    throw std::invalid_argument("eval_a: derivative order must be in 0..3");
  Scalar acc(0);
  for (int k = nl.degree(); k >= order; --k) {
    Scalar c = nl.coeffs[k];
    for (int f = 0; f < order; ++f) c *= Scalar(k - f);
    acc = acc * s + c;
  }
  return acc;
}

// u(s) = -1/2 int_0^s a, so that -grad U(psi) = a(|psi|^2) psi.
template <typename Scalar> Scalar potential_u(const Nonlinearity<Scalar> &nl, Scalar s) {
  Scalar acc(0);
  for (int k = nl.degree(); k >= 0; --k) acc = acc * s + nl.coeffs[k] / Scalar(k + 1);
  return -Scalar(0.5) * acc * s;
}

template <typename Scalar> Scalar potential_U(const Nonlinearity<Scalar> &nl, const Pair<Scalar> &psi) {
  return potential_u(nl, psi.squaredNorm());
}

// Nodal sum with Dirichlet ghost zeros; the discrete charge the evolution scheme conserves.
template <typename Scalar> Scalar charge(const FieldState<Scalar> &f) { return f.values.rowwise().squaredNorm().sum() * f.grid.dx; }

// 1/2 sum |D+ psi|^2 dx over all cells, Dirichlet ghost zeros outside, plus U at the origin.
// This is the energy conserved exactly by the Crank-Nicolson scheme in `evolution`.
template <typename Scalar> Scalar hamiltonian(const FieldState<Scalar> &f, const Nonlinearity<Scalar> &nl) {
  const auto &v = f.values;
  const Eigen::Index n = f.grid.n;
  Scalar grad = v.row(0).squaredNorm() + v.row(n - 1).squaredNorm();
  for (Eigen::Index i = 0; i + 1 < n; ++i) grad += (v.row(i + 1) - v.row(i)).squaredNorm();
  return Scalar(0.5) * grad / f.grid.dx + potential_U(nl, f.at_origin());
}

enum class NormKind { Linf_minus_beta, L1_beta };

template <typename Scalar> Scalar weighted_norm(const FieldState<Scalar> &f, Scalar beta, NormKind kind) {
  if (beta < 0)
    throw std::invalid_argument("weighted_norm: beta must be non-negative");
  const RealVector<Scalar> mag = f.values.rowwise().norm();
  const RealVector<Scalar> wgt =
      (Scalar(1) + f.grid.nodes().array().abs()).pow(kind == NormKind::Linf_minus_beta ? -beta : beta).matrix();
  if (kind == NormKind::Linf_minus_beta)
    return (mag.array() * wgt.array()).maxCoeff();
  const auto w = quadrature_weights(f.grid, Quadrature::trapezoid);
  return (mag.array() * wgt.array() * w.array()).sum();
}

// Growth condition U(z) >= A - B|z|^2, sampled on |z|^2 <= s_max. Globally it holds iff
// u(s) grows at most linearly from below, i.e. deg a = 0 or the leading coefficient of a is negative.
template <typename Scalar> struct AdmissibilityReport {
  Scalar s_max;
  Scalar B;
  Scalar A_on_region; // min over the region of u(s) + B s
  bool global_condition;
  std::string condition;
};

template <typename Scalar>
AdmissibilityReport<Scalar> admissibility(const Nonlinearity<Scalar> &nl, Scalar s_max, Scalar B, int samples = 4097) {
  Scalar lo = std::numeric_limits<Scalar>::infinity();
  for (int i = 0; i < samples; ++i) {
    const Scalar s = s_max * Scalar(i) / Scalar(samples - 1);
    lo = std::min(lo, potential_u(nl, s) + B * s);
  }
  const int d = nl.degree();
  const bool global = d == 0 || nl.coeffs[d] < 0;
  std::string cond = d == 0 ? "a constant: u linear in |z|^2" : "leading coefficient of a must be negative";
  return {s_max, B, lo, global, cond};
}

} // namespace soliton
