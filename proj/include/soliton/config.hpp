#pragma once

#include "soliton/evolution.hpp"
#include "soliton/nonlinearity.hpp"
#include "soliton/solitary.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace soliton {

class config_error : public std::runtime_error {
public:
  config_error(int line, std::string field, const std::string &message);
  int line() const { return line_; }
  const std::string &field() const { return field_; }

private:
  int line_;
  std::string field_;
};

enum class Perturbation { none, gaussian };

struct ExperimentConfig {
  // [nonlinearity]
  std::vector<double> coefficients{0.2, 0.8};
  int branch = 0; // index into the amplitudes for omega, ascending
  // [soliton] exactly one of omega, C
  std::optional<double> omega{0.25}, C;
  double theta = 0;
  // [grid]
  double dx = 0.05, L = 200;
  // [time]
  double dt = 0.01, T = 200, log_every = 0.25;
  // [boundary]
  Boundary boundary = Boundary::absorbing_layer;
  double layer_width = 40, layer_strength = 1;
  // [perturbation]
  std::complex<double> z0{0.1, 0};
  Perturbation f0 = Perturbation::none;
  double f0_center = 0, f0_width = 1, f0_amplitude = 0;
  double jitter = 0; // seeded uniform noise added to f0 before projection
  std::uint64_t seed = 1;
  // [fit]
  double fit_t0 = 5, fit_t1 = 0; // 0: up to the reflection time
  double beta = 2;
  double scattering_every = 0;
  // [scan] for the FGR atlas
  double C_min = 0.5, C_max = 3;
  int C_count = 251;
  // [dispersive]
  std::vector<double> betas{2, 3};
  double dispersive_T = 60;
  // [output]
  std::string output = "out";

  bool operator==(const ExperimentConfig &) const = default;

  Nonlinearity<double> nonlinearity() const { return Nonlinearity<double>{coefficients}; }
  EvolutionConfig<double> evolution() const;
  // Solitary wave selected by omega (with branch) or by C.
  SolitonParams<double> soliton() const;
};

ExperimentConfig parse_config(const std::string &text);
ExperimentConfig load_config(const std::string &path);
// Re-parses to an equal configuration.
std::string echo_config(const ExperimentConfig &cfg);

} // namespace soliton
