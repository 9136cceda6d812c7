#pragma once

#include "soliton/evolution.hpp"
#include "soliton/fit.hpp"
#include "soliton/solitary.hpp"
#include "soliton/spectral.hpp"

#include <optional>
#include <string>
#include <vector>

namespace soliton {

template <typename Scalar> struct InitialData {
  FieldState<Scalar> psi;
  Scalar epsilon; // |z0|^2
};

// e^{j theta}[Psi + z0 u + conj(z0) u* + Pc f0]; f0 may be empty (zero rows).
template <typename Scalar>
InitialData<Scalar> prepare_initial_data(const SolitonParams<Scalar> &p, Complex<Scalar> z0, const FieldState<Scalar> &f0,
                                         const Linearization<Scalar> &lin, const Grid<Scalar> &g);

template <typename Scalar> struct FrameGuess {
  Scalar omega, theta, C;
};

template <typename Scalar> struct Frame {
  Scalar omega = 0, theta = 0, C = 0;
  Complex<Scalar> z{};
  FieldState<Scalar> f;
  int iterations = 0;
  Scalar orthogonality = 0; // max of |<f,Psi>|, |<f,j dPsi>|, |<f,ju>| over ||f||
};

// Amplitude on the branch a(C^2) = 2 sqrt(omega) closest to C_guess.
template <typename Scalar> Scalar amplitude_on_branch(const Nonlinearity<Scalar> &nl, Scalar omega, Scalar C_guess);

// Solves <chi, Psi_omega> = <chi, j d_omega Psi_omega> = 0, chi = e^{-j theta} psi - Psi_omega, by damped Newton.
template <typename Scalar> class FrameExtractor {
public:
  FrameExtractor(const Nonlinearity<Scalar> &nl, const Grid<Scalar> &g, Scalar tol = Scalar(1e-13), int max_iterations = 60);
  Frame<Scalar> operator()(const FieldState<Scalar> &psi, const FrameGuess<Scalar> &guess) const;

private:
  Nonlinearity<Scalar> nl_;
  Grid<Scalar> grid_;
  RealVector<Scalar> w_, ax_;
  Scalar tol_;
  int max_iterations_;
};

template <typename Scalar>
Frame<Scalar> extract_frame(const FieldState<Scalar> &psi, const Nonlinearity<Scalar> &nl, const FrameGuess<Scalar> &guess);

template <typename Scalar> struct TrackRow {
  Scalar t, omega, theta, gamma, C;
  Complex<Scalar> z;
  Scalar f_inf_mbeta, f_L2, orthogonality;
};

// Estimated scattering profile W(-t) e^{j theta} f at one time, with its unrotated radiation.
template <typename Scalar> struct ScatteringSample {
  Scalar t;
  FieldState<Scalar> phi, radiation;
};

template <typename Scalar> struct ModulationTrack {
  Scalar beta = 2;
  std::vector<TrackRow<Scalar>> rows;
  std::vector<ScatteringSample<Scalar>> scattering;
  bool truncated = false;
  std::string failure;

  std::vector<Scalar> column(Scalar TrackRow<Scalar>::*field) const;
  std::vector<Scalar> times() const { return column(&TrackRow<Scalar>::t); }
  std::vector<Scalar> y() const; // |z|^2
};

// Online frame extraction, usable directly as an evolution Observer.
template <typename Scalar> class Tracker {
public:
  Tracker(const Nonlinearity<Scalar> &nl, const Grid<Scalar> &g, const FrameGuess<Scalar> &start, Scalar beta = 2,
          Scalar scattering_every = 0);
  void observe(Scalar t, const FieldState<Scalar> &psi);
  const ModulationTrack<Scalar> &track() const { return track_; }
  Observer<Scalar> observer() {
    return [this](Scalar t, const FieldState<Scalar> &psi) { observe(t, psi); };
  }

private:
  FrameExtractor<Scalar> extract_;
  FrameGuess<Scalar> guess_;
  ModulationTrack<Scalar> track_;
  Scalar scattering_every_, next_scattering_ = 0;
  Scalar omega_integral_ = 0;
};

template <typename Scalar>
ModulationTrack<Scalar> track(const Trajectory<Scalar> &traj, const Nonlinearity<Scalar> &nl, const FrameGuess<Scalar> &start,
                              Scalar beta = 2);

// Latest time uncontaminated by reflections: L/4 for a hard wall, T with an absorbing layer.
template <typename Scalar> Scalar reflection_time(const EvolutionConfig<Scalar> &cfg);

// y = y0 / (1 + lambda t) on [t0, t1].
FitResult fit_ricatti(const ModulationTrack<double> &tr, double t0, double t1);

struct DecayLaws {
  FitResult z_slope, f_slope, omega, gamma;
};

// |z| and ||f||_{L^inf_{-beta}} log-log slopes; omega oscillation frequency and envelope exponent;
// gamma = gamma_plus + c log(1 + k t).
DecayLaws fit_decay_laws(const ModulationTrack<double> &tr, double t0, double t1, double mu_hint);

enum class DispersiveVariant { plain, resolvent_shifted, unprojected };
const char *to_string(DispersiveVariant v);

struct DispersiveResult {
  DispersiveVariant variant;
  FitResult fit;
  std::vector<double> t, norm;
  bool decays = false;
};

// Evolves h = Pc h0, R(2i mu + 0) Pc h0, or h0 itself under the linearization and fits the
// L^inf_{-beta} decay exponent on [t0, t1].
DispersiveResult dispersive_decay_check(const Linearization<double> &lin, const FieldState<double> &h0, const EvolutionConfig<double> &cfg,
                                        DispersiveVariant variant, double beta = 2, double t0 = 5, double sample_every = 0.25);

struct CauchyPair {
  double t1, t2, difference, reference;
};

struct ScatteringReport {
  FitResult residual_fit;
  std::vector<CauchyPair> cauchy;
  std::vector<double> t, residual;
};

// Cauchy differences of Phi_est between stored samples and the decay of
// ||e^{j theta} f(t) - W(t) Phi_est(t_max)||_{L2} + sup on [t0, t_max / 2].
ScatteringReport scattering_residual(const ModulationTrack<double> &tr, double t0 = 5);

} // namespace soliton
