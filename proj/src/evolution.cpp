#include "soliton/evolution.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace soliton {

template <typename Scalar> void EvolutionConfig<Scalar>::validate() const {
  if (!(dt > 0) || !(dx > 0) || !(T > 0) || !(L > 0))
    throw std::invalid_argument("evolution: dt, dx, L and T must be positive");
  if (boundary == Boundary::absorbing_layer && !(layer_width > 0 && layer_width < L / 2))
    throw std::invalid_argument("evolution: absorbing layer width must lie in (0, L/2)");
  if (picard_max < 1 || !(picard_tol > 0))
    throw std::invalid_argument("evolution: invalid Picard settings");
}

template <typename Scalar> RealVector<Scalar> absorbing_profile(const Grid<Scalar> &g, const EvolutionConfig<Scalar> &cfg) {
  RealVector<Scalar> W = RealVector<Scalar>::Zero(g.n);
  if (cfg.boundary != Boundary::absorbing_layer)
    return W;
  const Scalar L = g.half_width(), w = cfg.layer_width;
  for (Eigen::Index i = 0; i < g.n; ++i) {
    const Scalar d = std::abs(g.x(i)) - (L - w);
    if (d > 0) W(i) = cfg.layer_strength * (d / w) * (d / w);
  }
  return W;
}

template <typename Scalar> Tridiagonal<Scalar>::Tridiagonal(const ComplexVector<Scalar> &diag, Complex<Scalar> off) : off_(off) {
  const Eigen::Index n = diag.size();
  cprime_.resize(n);
  denom_.resize(n);
  denom_(0) = diag(0);
  cprime_(0) = off / denom_(0);
  for (Eigen::Index i = 1; i < n; ++i) {
    denom_(i) = diag(i) - off * cprime_(i - 1);
    cprime_(i) = off / denom_(i);
  }
}

template <typename Scalar> ComplexVector<Scalar> Tridiagonal<Scalar>::solve(const ComplexVector<Scalar> &rhs) const {
  const Eigen::Index n = rhs.size();
  ComplexVector<Scalar> y(n);
  y(0) = rhs(0) / denom_(0);
  for (Eigen::Index i = 1; i < n; ++i) y(i) = (rhs(i) - off_ * y(i - 1)) / denom_(i);
  for (Eigen::Index i = n - 2; i >= 0; --i) y(i) -= cprime_(i) * y(i + 1);
  return y;
}

template <typename Scalar> Scalar mean_a(const Nonlinearity<Scalar> &nl, Scalar s0, Scalar s1) {
  Scalar acc(0);
  for (int k = nl.degree(); k >= 0; --k) {
    Scalar h(0), p1(1);
    for (int m = 0; m <= k; ++m) {
      h += p1 * std::pow(s0, k - m);
      p1 *= s1;
    }
    acc += nl.coeffs[k] / Scalar(k + 1) * h;
  }
  return acc;
}

namespace {

// (I + sign dt/2 (i (A + shift) + W)) applied implicitly; returns its diagonal and off-diagonal.
template <typename Scalar>
std::pair<ComplexVector<Scalar>, Complex<Scalar>> cn_matrix(const Grid<Scalar> &g, const RealVector<Scalar> &W, Scalar dt, Scalar rot,
                                                           Scalar shift) {
  const Complex<Scalar> I(0, 1);
  const Scalar h2 = g.dx * g.dx;
  ComplexVector<Scalar> d(g.n);
  for (Eigen::Index i = 0; i < g.n; ++i) d(i) = Scalar(1) + dt / 2 * (rot * I * (2 / h2 + shift) + W(i));
  return {d, -rot * I * dt / (2 * h2)};
}

// (I - dt/2 (i rot (A + shift) + W)) p
template <typename Scalar>
ComplexVector<Scalar> cn_explicit(const ComplexVector<Scalar> &p, const RealVector<Scalar> &W, Scalar dx, Scalar dt, Scalar rot,
                                  Scalar shift) {
  const Complex<Scalar> I(0, 1);
  const Scalar h2 = dx * dx;
  const Eigen::Index n = p.size();
  ComplexVector<Scalar> r(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex<Scalar> l = i > 0 ? p(i - 1) : Complex<Scalar>(0);
    const Complex<Scalar> rr = i + 1 < n ? p(i + 1) : Complex<Scalar>(0);
    const Complex<Scalar> Ap = (Scalar(2) * p(i) - l - rr) / h2 + shift * p(i);
    r(i) = p(i) - dt / 2 * (rot * I * Ap + W(i) * p(i));
  }
  return r;
}

template <typename Scalar> ComplexVector<Scalar> unit(Eigen::Index n, Eigen::Index c) {
  ComplexVector<Scalar> e = ComplexVector<Scalar>::Zero(n);
  e(c) = 1;
  return e;
}

} // namespace

template <typename Scalar>
NonlinearStepper<Scalar>::NonlinearStepper(const Grid<Scalar> &g, const Nonlinearity<Scalar> &nl, const EvolutionConfig<Scalar> &cfg,
                                           Scalar dt)
    : grid_(g), nl_(nl), cfg_(cfg), dt_(dt), W_(absorbing_profile(g, cfg)) {
  auto [d, off] = cn_matrix(g, W_, dt, Scalar(1), Scalar(0));
  lhs_ = Tridiagonal<Scalar>(d, off);
  g_ = lhs_.solve(unit<Scalar>(g.n, g.center()));
}

template <typename Scalar> ComplexVector<Scalar> NonlinearStepper<Scalar>::explicit_part(const ComplexVector<Scalar> &psi) const {
  return lhs_.solve(cn_explicit(psi, W_, grid_.dx, dt_, Scalar(1), Scalar(0)));
}

template <typename Scalar> bool NonlinearStepper<Scalar>::try_step(ComplexVector<Scalar> &psi, int &iterations) const {
  const Eigen::Index c = grid_.center();
  const ComplexVector<Scalar> xf = explicit_part(psi);
  const Complex<Scalar> gam(0, dt_ / (2 * grid_.dx));
  const Complex<Scalar> p0 = psi(c);
  const Scalar s0 = std::norm(p0);
  Complex<Scalar> p1 = xf(c);
  bool converged = false;
  for (iterations = 1; iterations <= cfg_.picard_max; ++iterations) {
    const Scalar am = mean_a(nl_, s0, std::norm(p1));
    const Complex<Scalar> next = (xf(c) + gam * am * p0 * g_(c)) / (Scalar(1) - gam * am * g_(c));
    const Scalar change = std::abs(next - p1);
    p1 = next;
    if (change <= cfg_.picard_tol * std::max(Scalar(1), std::abs(p1))) {
      converged = true;
      break;
    }
  }
  if (!converged || !std::isfinite(std::abs(p1)))
    return false;
  const Scalar am = mean_a(nl_, s0, std::norm(p1));
  ComplexVector<Scalar> next = xf + (gam * am * (p1 + p0)) * g_;
  absorbed_ = 0;
  if (cfg_.boundary == Boundary::absorbing_layer) {
    for (Eigen::Index i = 0; i < grid_.n; ++i)
      if (W_(i) > 0) absorbed_ += W_(i) * std::norm((next(i) + psi(i)) / Scalar(2));
    absorbed_ *= 2 * dt_ * grid_.dx;
  }
  psi = std::move(next);
  return true;
}

template <typename Scalar> void NonlinearStepper<Scalar>::step(ComplexVector<Scalar> &psi, StepStats<Scalar> &stats, int max_halvings) const {
  int it = 0;
  if (try_step(psi, it)) {
    stats.picard_iterations = std::max(stats.picard_iterations, it);
    return;
  }
  if (max_halvings <= 0)
    throw guard_trip("nonlinear step: Picard iteration at the origin failed to converge");
  ++stats.dt_halvings;
  NonlinearStepper half(grid_, nl_, cfg_, dt_ / 2);
  half.step(psi, stats, max_halvings - 1);
  Scalar absorbed = half.absorbed();
  half.step(psi, stats, max_halvings - 1);
  absorbed_ = absorbed + half.absorbed();
}

template <typename Scalar>
FieldState<Scalar> step_nonlinear(const FieldState<Scalar> &f, const Nonlinearity<Scalar> &nl, const EvolutionConfig<Scalar> &cfg) {
  cfg.validate();
  NonlinearStepper<Scalar> st(f.grid, nl, cfg, cfg.dt);
  ComplexVector<Scalar> psi = to_complex(f);
  StepStats<Scalar> stats;
  st.step(psi, stats);
  return from_complex(psi, f.grid);
}

template <typename Scalar>
LinearizedStepper<Scalar>::LinearizedStepper(const Grid<Scalar> &g, const Linearization<Scalar> &lin, const EvolutionConfig<Scalar> &cfg,
                                             Scalar dt)
    : grid_(g), lin_(grid_consistent(lin, g.dx)), dt_(dt), W_(absorbing_profile(g, cfg)) {
  auto [dp, op] = cn_matrix(g, W_, dt, Scalar(1), lin.omega);
  auto [dq, oq] = cn_matrix(g, W_, dt, Scalar(-1), lin.omega);
  lp_ = Tridiagonal<Scalar>(dp, op);
  lq_ = Tridiagonal<Scalar>(dq, oq);
  gp_ = lp_.solve(unit<Scalar>(g.n, g.center()));
  gq_ = lq_.solve(unit<Scalar>(g.n, g.center()));
}

template <typename Scalar> void LinearizedStepper<Scalar>::step(ComplexVector<Scalar> &p, ComplexVector<Scalar> &q) const {
  const Eigen::Index c = grid_.center();
  const Complex<Scalar> gam(0, dt_ / (2 * grid_.dx));
  const Scalar al = lin_.alpha, be = lin_.beta;
  const ComplexVector<Scalar> xp = lp_.solve(cn_explicit(p, W_, grid_.dx, dt_, Scalar(1), lin_.omega));
  const ComplexVector<Scalar> xq = lq_.solve(cn_explicit(q, W_, grid_.dx, dt_, Scalar(-1), lin_.omega));
  const Complex<Scalar> p0 = p(c), q0 = q(c);
  const Complex<Scalar> sp = gam * gp_(c), sq = gam * gq_(c);
  // P = xp_c + sp (al (p0 + P) + be (q0 + Q)),  Q = xq_c - sq (be (p0 + P) + al (q0 + Q))
  Block2<Scalar> M;
  M << Scalar(1) - sp * al, -sp * be, sq * be, Scalar(1) + sq * al;
  Pair<Scalar> rhs(xp(c) + sp * (al * p0 + be * q0), xq(c) - sq * (be * p0 + al * q0));
  const Pair<Scalar> PQ = M.partialPivLu().solve(rhs);
  const Complex<Scalar> sump = p0 + PQ(0), sumq = q0 + PQ(1);
  p = xp + (gam * (al * sump + be * sumq)) * gp_;
  q = xq - (gam * (be * sump + al * sumq)) * gq_;
}

template <typename Scalar> void to_pq(const FieldState<Scalar> &chi, ComplexVector<Scalar> &p, ComplexVector<Scalar> &q) {
  const Complex<Scalar> I(0, 1);
  p = chi.values.col(0) + I * chi.values.col(1);
  q = chi.values.col(0) - I * chi.values.col(1);
}

template <typename Scalar> FieldState<Scalar> from_pq(const ComplexVector<Scalar> &p, const ComplexVector<Scalar> &q, const Grid<Scalar> &g) {
  const Complex<Scalar> I(0, 1);
  Field<Scalar> v(g.n, 2);
  v.col(0) = (p + q) / Scalar(2);
  v.col(1) = (p - q) / (Scalar(2) * I);
  return FieldState<Scalar>(std::move(v), g);
}

template <typename Scalar>
FieldState<Scalar> step_linearized(const FieldState<Scalar> &chi, const Linearization<Scalar> &lin, const EvolutionConfig<Scalar> &cfg) {
  cfg.validate();
  LinearizedStepper<Scalar> st(chi.grid, lin, cfg, cfg.dt);
  ComplexVector<Scalar> p, q;
  to_pq(chi, p, q);
  st.step(p, q);
  return from_pq(p, q, chi.grid);
}

namespace {

// s_m = sum_j p_j sin(pi (j+1) m / (n+1)), m = 1..n, via an odd extension of length 2(n+1).
template <typename Scalar> ComplexVector<Scalar> sine_sum(const ComplexVector<Scalar> &p) {
  const Eigen::Index n = p.size();
  const Eigen::Index N = 2 * (n + 1);
  std::vector<Complex<Scalar>> x(N, Complex<Scalar>(0)), X;
  for (Eigen::Index j = 1; j <= n; ++j) {
    x[j] = p(j - 1);
    x[N - j] = -p(j - 1);
  }
  Eigen::FFT<Scalar> fft;
  fft.fwd(X, x);
  ComplexVector<Scalar> s(n);
  const Complex<Scalar> half_i(0, Scalar(0.5));
  for (Eigen::Index m = 1; m <= n; ++m) s(m - 1) = half_i * X[m];
  return s;
}

} // namespace

template <typename Scalar> ComplexVector<Scalar> free_flow_scalar(const ComplexVector<Scalar> &p, Scalar dx, Scalar t) {
  const Eigen::Index n = p.size();
  if (t == Scalar(0))
    return p;
  ComplexVector<Scalar> s = sine_sum(p);
  const Scalar pi = std::acos(Scalar(-1));
  for (Eigen::Index m = 1; m <= n; ++m) {
    const Scalar lam = (2 - 2 * std::cos(pi * Scalar(m) / Scalar(n + 1))) / (dx * dx);
    s(m - 1) *= std::polar(Scalar(1), -lam * t);
  }
  return sine_sum(s) * (Scalar(2) / Scalar(n + 1));
}

template <typename Scalar> FieldState<Scalar> free_flow(const FieldState<Scalar> &f, Scalar t) {
  ComplexVector<Scalar> p, q;
  to_pq(f, p, q);
  return from_pq(free_flow_scalar(p, f.grid.dx, t), free_flow_scalar(q, f.grid.dx, -t), f.grid);
}

template <typename Scalar> Scalar Trajectory<Scalar>::max_charge_drift() const {
  Scalar m(0);
  if (conserved.empty())
    return m;
  const Scalar Q0 = conserved.front().Q;
  for (const auto &c : conserved) m = std::max(m, std::abs(c.Q + c.absorbed - Q0) / (Q0 > 0 ? Q0 : Scalar(1)));
  return m;
}

template <typename Scalar> Scalar Trajectory<Scalar>::max_energy_drift() const {
  Scalar m(0);
  if (conserved.empty())
    return m;
  const Scalar H0 = conserved.front().H;
  for (const auto &c : conserved) m = std::max(m, std::abs(c.H - H0) / (std::abs(H0) > 0 ? std::abs(H0) : Scalar(1)));
  return m;
}

template <typename Scalar>
Trajectory<Scalar> evolve(const FieldState<Scalar> &f0, const Nonlinearity<Scalar> &nl, const EvolutionConfig<Scalar> &cfg,
                          const Observer<Scalar> &observer) {
  cfg.validate();
  f0.validate();
  if (f0.values.imag().cwiseAbs().maxCoeff() > 0)
    throw std::invalid_argument("evolve: the physical field must be real-valued in real form");
  const Grid<Scalar> &g = f0.grid;
  const NonlinearStepper<Scalar> stepper(g, nl, cfg, cfg.dt);
  const long nsteps = std::lround(cfg.T / cfg.dt);
  const long log_stride = std::max(1L, std::lround(cfg.log_every / cfg.dt));
  const long snap_stride = cfg.snapshot_every > 0 ? std::max(1L, std::lround(cfg.snapshot_every / cfg.dt)) : 0;

  Trajectory<Scalar> traj;
  ComplexVector<Scalar> psi = to_complex(f0);
  Scalar absorbed(0);
  const Scalar Q0 = charge(f0);
  auto record = [&](long k, bool last) {
    const Scalar t = Scalar(k) * cfg.dt;
    const FieldState<Scalar> f = from_complex(psi, g);
    const Scalar Q = charge(f);
    traj.conserved.push_back({t, Q, hamiltonian(f, nl), absorbed});
    if (observer) observer(t, f);
    if (k == 0 || last || (snap_stride > 0 && k % snap_stride == 0)) traj.snapshots.emplace_back(t, f);
    const Scalar drift = std::abs(Q + absorbed - Q0) / (Q0 > 0 ? Q0 : Scalar(1));
    if (drift > cfg.charge_guard) {
      std::ostringstream os;
      os << "evolve: relative charge drift " << drift << " exceeds guard " << cfg.charge_guard << " at t = " << t;
      throw guard_trip(os.str());
    }
  };
  record(0, nsteps == 0);
  for (long k = 1; k <= nsteps; ++k) {
    stepper.step(psi, traj.stats);
    absorbed += stepper.absorbed();
    if (k % log_stride == 0 || k == nsteps) record(k, k == nsteps);
  }
  return traj;
}

template struct EvolutionConfig<double>;
template RealVector<double> absorbing_profile(const Grid<double> &, const EvolutionConfig<double> &);
template class Tridiagonal<double>;
template class NonlinearStepper<double>;
template class LinearizedStepper<double>;
template double mean_a(const Nonlinearity<double> &, double, double);
template FieldState<double> step_nonlinear(const FieldState<double> &, const Nonlinearity<double> &, const EvolutionConfig<double> &);
template FieldState<double> step_linearized(const FieldState<double> &, const Linearization<double> &, const EvolutionConfig<double> &);
template void to_pq(const FieldState<double> &, ComplexVector<double> &, ComplexVector<double> &);
template FieldState<double> from_pq(const ComplexVector<double> &, const ComplexVector<double> &, const Grid<double> &);
template FieldState<double> free_flow(const FieldState<double> &, double);
template ComplexVector<double> free_flow_scalar(const ComplexVector<double> &, double, double);
template struct Trajectory<double>;
template Trajectory<double> evolve(const FieldState<double> &, const Nonlinearity<double> &, const EvolutionConfig<double> &,
                                   const Observer<double> &);

} // namespace soliton
