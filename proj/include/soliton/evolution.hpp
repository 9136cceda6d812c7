#pragma once

#include "soliton/grid.hpp"
#include "soliton/nonlinearity.hpp"
#include "soliton/spectral.hpp"

#include <functional>
#include <vector>

namespace soliton {

enum class Boundary { dirichlet, absorbing_layer };

template <typename Scalar> struct EvolutionConfig {
  Scalar dx = Scalar(0.05);
  Scalar dt = Scalar(0.01);
  Scalar L = Scalar(200);
  Scalar T = Scalar(50);
  Scalar picard_tol = Scalar(1e-13);
  int picard_max = 50;
  Boundary boundary = Boundary::dirichlet;
  Scalar layer_width = Scalar(40);
  Scalar layer_strength = Scalar(1);
  Scalar charge_guard = Scalar(1e-4);
  Scalar log_every = Scalar(1);
  Scalar snapshot_every = Scalar(0); // 0: no stored snapshots beyond the first and last

  void validate() const;
  Grid<Scalar> grid() const { return Grid<Scalar>::from_half_width(L, dx); }
};

// Absorbing potential W(x) = s ((|x| - (L - w)) / w)^2 inside the layer.
template <typename Scalar> RealVector<Scalar> absorbing_profile(const Grid<Scalar> &g, const EvolutionConfig<Scalar> &cfg);

// Thomas factorization of a complex tridiagonal matrix with constant off-diagonal.
template <typename Scalar> class Tridiagonal {
public:
  Tridiagonal() = default;
  Tridiagonal(const ComplexVector<Scalar> &diag, Complex<Scalar> off);
  ComplexVector<Scalar> solve(const ComplexVector<Scalar> &rhs) const;

private:
  ComplexVector<Scalar> cprime_, denom_;
  Complex<Scalar> off_;
};

template <typename Scalar> struct StepStats {
  int picard_iterations = 0;
  int dt_halvings = 0;
};

// Crank-Nicolson for i psi_t = A psi - (a/dx) psi_0 e_0 - i W psi, A = -Laplacian (Dirichlet).
// The origin nonlinearity uses the mean of a over [|psi_0^n|^2, |psi_0^{n+1}|^2], which makes
// charge and the discrete energy exact invariants when W = 0.
template <typename Scalar> class NonlinearStepper {
public:
  NonlinearStepper(const Grid<Scalar> &g, const Nonlinearity<Scalar> &nl, const EvolutionConfig<Scalar> &cfg, Scalar dt);

  // Returns false when the fixed point at the origin does not converge; psi is left untouched then.
  bool try_step(ComplexVector<Scalar> &psi, int &iterations) const;
  // Retries with halved steps on Picard failure, down to dt / 2^max_halvings.
  void step(ComplexVector<Scalar> &psi, StepStats<Scalar> &stats, int max_halvings = 6) const;

  Scalar dt() const { return dt_; }
  // Charge removed by the absorbing layer during the last accepted step (exact for the scheme).
  Scalar absorbed() const { return absorbed_; }

private:
  Grid<Scalar> grid_;
  Nonlinearity<Scalar> nl_;
  EvolutionConfig<Scalar> cfg_;
  Scalar dt_;
  RealVector<Scalar> W_;
  Tridiagonal<Scalar> lhs_;
  ComplexVector<Scalar> g_;
  mutable Scalar absorbed_ = 0;
  ComplexVector<Scalar> explicit_part(const ComplexVector<Scalar> &psi) const;
};

template <typename Scalar> Scalar mean_a(const Nonlinearity<Scalar> &nl, Scalar s0, Scalar s1);

template <typename Scalar>
FieldState<Scalar> step_nonlinear(const FieldState<Scalar> &f, const Nonlinearity<Scalar> &nl, const EvolutionConfig<Scalar> &cfg);

// Crank-Nicolson for chi_t = C chi in the variables p = chi1 + i chi2, q = chi1 - i chi2:
// the two scalar equations decouple away from the origin and couple through a 2x2 system there.
template <typename Scalar> class LinearizedStepper {
public:
  LinearizedStepper(const Grid<Scalar> &g, const Linearization<Scalar> &lin, const EvolutionConfig<Scalar> &cfg, Scalar dt);
  void step(ComplexVector<Scalar> &p, ComplexVector<Scalar> &q) const;
  Scalar dt() const { return dt_; }

private:
  Grid<Scalar> grid_;
  Linearization<Scalar> lin_;
  Scalar dt_;
  RealVector<Scalar> W_;
  Tridiagonal<Scalar> lp_, lq_;
  ComplexVector<Scalar> gp_, gq_;
};

template <typename Scalar> void to_pq(const FieldState<Scalar> &chi, ComplexVector<Scalar> &p, ComplexVector<Scalar> &q);
template <typename Scalar> FieldState<Scalar> from_pq(const ComplexVector<Scalar> &p, const ComplexVector<Scalar> &q, const Grid<Scalar> &g);

template <typename Scalar>
FieldState<Scalar> step_linearized(const FieldState<Scalar> &chi, const Linearization<Scalar> &lin, const EvolutionConfig<Scalar> &cfg);

// e^{-jAt} with the Dirichlet Laplacian diagonalized by a sine transform.
template <typename Scalar> FieldState<Scalar> free_flow(const FieldState<Scalar> &f, Scalar t);
template <typename Scalar> ComplexVector<Scalar> free_flow_scalar(const ComplexVector<Scalar> &p, Scalar dx, Scalar t);

template <typename Scalar> struct ConservedSample {
  Scalar t, Q, H, absorbed;
};

template <typename Scalar> struct Trajectory {
  std::vector<std::pair<Scalar, FieldState<Scalar>>> snapshots;
  std::vector<ConservedSample<Scalar>> conserved;
  StepStats<Scalar> stats;

  Scalar max_charge_drift() const;
  Scalar max_energy_drift() const;
};

// Called at every log time with (t, psi) for online processing of long runs.
template <typename Scalar> using Observer = std::function<void(Scalar, const FieldState<Scalar> &)>;

template <typename Scalar>
Trajectory<Scalar> evolve(const FieldState<Scalar> &f0, const Nonlinearity<Scalar> &nl, const EvolutionConfig<Scalar> &cfg,
                          const Observer<Scalar> &observer = {});

} // namespace soliton
