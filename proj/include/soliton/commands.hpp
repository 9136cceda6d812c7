#pragma once

#include "soliton/config.hpp"
#include "soliton/io.hpp"
#include "soliton/modulation.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace soliton {

enum ExitCode { exit_ok = 0, exit_config = 2, exit_guard = 3 };

struct CommandResult {
  int exit_code = exit_ok;
  std::filesystem::path directory;
  nlohmann::ordered_json manifest;
};

// spectrum.json and d_scan.csv.
CommandResult cmd_spectrum(const ExperimentConfig &cfg);
// fgr_atlas.csv, fgr_zero_crossings.csv and manifest.json.
CommandResult cmd_fgr(const ExperimentConfig &cfg);

struct EvolveOutputs {
  CommandResult result;
  ModulationTrack<double> track;
  double charge_drift = 0, energy_drift = 0;
};

// track.csv, conserved.csv, scattering.csv, manifest.json, plots.gp.
EvolveOutputs run_evolve(const ExperimentConfig &cfg);
CommandResult cmd_evolve(const ExperimentConfig &cfg);
// dispersive.csv and manifest.json.
CommandResult cmd_dispersive(const ExperimentConfig &cfg);

// Loads the config and dispatches; maps config errors to 2 and guard trips to 3.
int run_command(const std::string &name, const std::string &config_path, std::ostream &log);

} // namespace soliton
