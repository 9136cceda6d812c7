#include "soliton/commands.hpp"

#include "soliton/fgr.hpp"

#include <chrono>
#include <ctime>
#include <ostream>
#include <random>

namespace soliton {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
json cnum(std::complex<double> v) { return json::array({num(v.real()), num(v.imag())}); }

Linearization<double> linearization(const ExperimentConfig &cfg) { return Linearization<double>::from(cfg.nonlinearity(), cfg.soliton()); }

json run_info() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return {{"finished_utc", buf}};
}

void write_manifest(CommandResult &r) { write_atomic(r.directory / "manifest.json", r.manifest.dump(2) + "\n"); }

FieldState<double> perturbation_f0(const ExperimentConfig &cfg, const Grid<double> &g) {
  FieldState<double> f(g);
  if (cfg.f0 == Perturbation::gaussian)
    for (Eigen::Index i = 0; i < g.n; ++i) {
      const double s = (g.x(i) - cfg.f0_center) / cfg.f0_width;
      f.values(i, 0) = cfg.f0_amplitude * std::exp(-s * s);
    }
  if (cfg.jitter > 0) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-cfg.jitter, cfg.jitter);
    for (Eigen::Index i = 1; i + 1 < g.n; ++i)
      for (int k = 0; k < 2; ++k) f.values(i, k) += u(rng);
  }
  return f;
}

json classification(const Linearization<double> &lin) {
  json j;
  j["omega"] = lin.omega;
  j["C"] = lin.C;
  j["a"] = lin.a;
  j["a_prime"] = lin.aprime;
  j["a_second"] = lin.asecond;
  j["alpha"] = lin.alpha;
  j["beta"] = lin.beta;
  j["classification"] = to_string(spectral_condition(lin));
  return j;
}

} // namespace

CommandResult cmd_spectrum(const ExperimentConfig &cfg) {
  CommandResult r;
  r.directory = output_directory(cfg.output);
  const auto lin = linearization(cfg);
  json j = classification(lin);
  j["continuous_spectrum"] = {{"lower_edge", lin.omega}, {"note", "continuous spectrum is i[omega, inf) and its mirror"}};
  const auto roots = gap_roots(lin);
  j["gap_roots"] = json::array();
  for (double v : roots) j["gap_roots"].push_back(v);
  if (lin.mu) {
    j["mu"] = *lin.mu;
    j["abs_D_at_i_mu"] = std::abs(determinant_D(lin, at_imag(*lin.mu)));
    const double c = eigen_coefficient(lin);
    j["eigen_coefficient"] = c;
    j["rho"] = 1 / c;
    j["u0"] = {cnum(eigenfunction_at(lin, 0.0)(0)), cnum(eigenfunction_at(lin, 0.0)(1))};
    j["delta"] = delta_closed(lin);
  }
  CsvTable scan({"nu", "re_D", "im_D", "on_cut"});
  const int n = 1200;
  for (int k = 1; k < n; ++k) {
    const double nu = 3 * lin.omega * k / n;
    if (nu < lin.omega) {
      scan.row({nu, determinant_on_gap(lin, nu), 0.0, 0.0});
    } else if (nu > lin.omega) {
      const auto D = determinant_D(lin, at_imag(nu, Side::plus_edge));
      scan.row({nu, D.real(), D.imag(), 1.0});
    }
  }
  write_atomic(r.directory / "d_scan.csv", scan.str());
  write_atomic(r.directory / "spectrum.json", j.dump(2) + "\n");
  r.manifest = {{"command", "spectrum"}, {"spectrum", j}, {"config", echo_config(cfg)}, {"run_info", run_info()}};
  write_manifest(r);
  return r;
}

CommandResult cmd_fgr(const ExperimentConfig &cfg) {
  CommandResult r;
  r.directory = output_directory(cfg.output);
  const auto nl = cfg.nonlinearity();
  std::vector<double> Cs;
  for (int k = 0; k < cfg.C_count; ++k) Cs.push_back(cfg.C_min + (cfg.C_max - cfg.C_min) * k / (cfg.C_count - 1));
  const auto scan = fgr_scan(nl, Cs);
  CsvTable atlas({"C", "omega", "class", "nu", "kappa", "rho", "c_nu", "re_fgr", "im_fgr", "signed_margin", "holds", "re_iK"});
  int in_window = 0;
  for (const auto &row : scan.rows) {
    if (!row.evaluated) continue;
    ++in_window;
    atlas.row({row.C, row.omega, double(int(row.klass)), row.nu, row.kappa, row.rho, row.c_nu, row.fgr_lhs.real(), row.fgr_lhs.imag(),
               row.signed_margin, row.holds ? 1.0 : 0.0, row.re_iK});
  }
  CsvTable zeros({"C"});
  for (double c : scan.zero_crossings) zeros.row({c});
  write_atomic(r.directory / "fgr_atlas.csv", atlas.str());
  write_atomic(r.directory / "fgr_zero_crossings.csv", zeros.str());
  r.manifest = {{"command", "fgr"}, {"rows", in_window}, {"zero_crossings", scan.zero_crossings}, {"config", echo_config(cfg)}};
  if (in_window == 0) r.manifest["warning"] = "no in-window amplitudes in the scanned range";
  r.manifest["run_info"] = run_info();
  write_manifest(r);
  return r;
}

EvolveOutputs run_evolve(const ExperimentConfig &cfg) {
  EvolveOutputs out;
  auto &r = out.result;
  r.directory = output_directory(cfg.output);
  const auto nl = cfg.nonlinearity();
  const auto sp = cfg.soliton();
  const auto lin = Linearization<double>::from(nl, sp);
  const auto ecfg = cfg.evolution();
  const auto g = ecfg.grid();
  const bool perturbed = cfg.z0 != std::complex<double>(0);
  json &m = r.manifest;
  m["command"] = "evolve";
  m["soliton"] = classification(lin);

  json prediction = nullptr;
  if (perturbed) {
    const auto klass = spectral_condition(lin);
    if (klass != SpectralClass::in_window)
      throw config_error(0, "soliton", std::string("perturbed runs need an in-window soliton, got ") + to_string(klass));
    const auto dr = damping_coefficient(lin);
    if (!(dr.re_iK < 0))
      throw config_error(0, "soliton", "the Fermi golden rule coupling vanishes at this soliton");
    const double y0 = std::norm(cfg.z0);
    prediction = {{"mu", *lin.mu}, {"delta", dr.delta}, {"re_iK", dr.re_iK}, {"y0", y0}, {"lambda_pred", predicted_lambda(dr.re_iK, y0)}};
  }
  m["prediction"] = prediction;

  const FieldState<double> f0 = perturbation_f0(cfg, g);
  const bool has_f0 = cfg.f0 != Perturbation::none || cfg.jitter > 0;
  const auto id = prepare_initial_data(sp, cfg.z0, has_f0 ? f0 : FieldState<double>(), lin, g);
  m["epsilon"] = id.epsilon;

  Tracker<double> tracker(nl, g, {sp.omega, sp.theta, sp.C}, cfg.beta, cfg.scattering_every);
  Trajectory<double> traj;
  json errors = json::array();
  try {
    traj = evolve(id.psi, nl, ecfg, tracker.observer());
  } catch (const guard_trip &e) {
    errors.push_back({{"kind", "guard_trip"}, {"message", e.what()}});
    r.exit_code = exit_guard;
  }
  out.track = tracker.track();
  const auto &tr = out.track;
  if (tr.truncated) errors.push_back({{"kind", "track_truncated"}, {"message", tr.failure}});

  CsvTable track_csv({"t", "omega", "theta", "gamma", "re_z", "im_z", "f_inf_mbeta", "f_L2"});
  for (const auto &row : tr.rows)
    track_csv.row({row.t, row.omega, row.theta, row.gamma, row.z.real(), row.z.imag(), row.f_inf_mbeta, row.f_L2});
  write_atomic(r.directory / "track.csv", track_csv.str());
  CsvTable conserved({"t", "Q", "H", "absorbed"});
  for (const auto &c : traj.conserved) conserved.row({c.t, c.Q, c.H, c.absorbed});
  write_atomic(r.directory / "conserved.csv", conserved.str());

  if (!traj.conserved.empty()) {
    out.charge_drift = traj.max_charge_drift();
    out.energy_drift = traj.max_energy_drift();
  }
  m["conservation"] = {{"max_relative_charge_drift", num(out.charge_drift)},
                       {"max_relative_energy_drift", num(out.energy_drift)},
                       {"absorbing_layer", cfg.boundary == Boundary::absorbing_layer},
                       {"picard_iterations", traj.stats.picard_iterations},
                       {"dt_halvings", traj.stats.dt_halvings}};

  const double t_reflect = reflection_time(ecfg);
  double t1 = cfg.fit_t1 > 0 ? cfg.fit_t1 : cfg.T;
  json window = {{"t0", cfg.fit_t0}};
  if (t1 > t_reflect) {
    window["truncated_from"] = t1;
    t1 = t_reflect;
  }
  if (!tr.rows.empty() && t1 > tr.rows.back().t) {
    window["truncated_by_track_at"] = tr.rows.back().t;
    t1 = tr.rows.back().t;
  }
  window["t1"] = t1;
  m["fit_window"] = window;

  json fits = json::array();
  if (perturbed && t1 > cfg.fit_t0) {
    const auto ric = fit_ricatti(tr, cfg.fit_t0, t1);
    fits.push_back(to_json(ric));
    const auto laws = fit_decay_laws(tr, cfg.fit_t0, t1, *lin.mu);
    for (const auto *f : {&laws.z_slope, &laws.f_slope, &laws.omega, &laws.gamma}) fits.push_back(to_json(*f));
    if (ric.ok) {
      // prediction at the fitted y0 and at the late-time frequency
      const double y0 = ric.param("y0");
      m["prediction"]["lambda_pred_fitted_y0"] = predicted_lambda(prediction["re_iK"].get<double>(), y0);
      if (laws.omega.ok && std::isfinite(laws.omega.params[2])) {
        try {
          const double om_plus = laws.omega.params[2];
          const double Cp = amplitude_on_branch(nl, om_plus, sp.C);
          const auto lp = Linearization<double>::from(nl, SolitonParams<double>{Cp, om_plus, 0});
          if (spectral_condition(lp) == SpectralClass::in_window) {
            const double reK = damping_coefficient(lp).re_iK;
            m["prediction"]["omega_plus"] = om_plus;
            m["prediction"]["mu_plus"] = *lp.mu;
            m["prediction"]["re_iK_plus"] = reK;
            m["prediction"]["lambda_pred_plus"] = predicted_lambda(reK, y0);
          }
        } catch (const std::exception &e) {
          errors.push_back({{"kind", "prediction"}, {"message", e.what()}});
        }
      }
    }
  } else if (!perturbed) {
    m["fits_skipped"] = "unperturbed soliton";
  }
  m["fits"] = fits;

  if (tr.scattering.size() >= 2) {
    const auto sc = scattering_residual(tr, cfg.fit_t0);
    CsvTable scat({"t", "residual"});
    for (std::size_t i = 0; i < sc.t.size(); ++i) scat.row({sc.t[i], sc.residual[i]});
    write_atomic(r.directory / "scattering.csv", scat.str());
    json cauchy = json::array();
    for (const auto &c : sc.cauchy) cauchy.push_back({{"t1", c.t1}, {"t2", c.t2}, {"difference", c.difference}, {"reference", c.reference}});
    m["scattering"] = {{"residual_fit", to_json(sc.residual_fit)}, {"cauchy", cauchy}};
  }

  m["errors"] = errors;
  m["config"] = echo_config(cfg);
  m["run_info"] = run_info();
  write_manifest(r);

  const std::string plots = "set datafile separator ','\n"
                            "set terminal pngcairo size 900,600\n"
                            "set output 'y.png'\n"
                            "plot 'track.csv' using 1:($5**2+$6**2) with lines title 'y = |z|^2'\n"
                            "set output 'log_z.png'\nset logscale xy\n"
                            "plot 'track.csv' using 1:(sqrt($5**2+$6**2)) with lines title '|z|'\n"
                            "set output 'f_norm.png'\n"
                            "plot 'track.csv' using 1:7 with lines title 'f in weighted sup norm'\n"
                            "unset logscale\nset output 'omega.png'\n"
                            "plot 'track.csv' using 1:2 with lines title 'omega'\n"
                            "set output 'gamma.png'\n"
                            "plot 'track.csv' using 1:4 with lines title 'gamma'\n";
  write_atomic(r.directory / "plots.gp", plots);
  return out;
}

CommandResult cmd_evolve(const ExperimentConfig &cfg) { return run_evolve(cfg).result; }

CommandResult cmd_dispersive(const ExperimentConfig &cfg) {
  CommandResult r;
  r.directory = output_directory(cfg.output);
  const auto lin = linearization(cfg);
  if (!lin.mu)
    throw config_error(0, "soliton", "dispersive checks need a soliton with an internal mode");
  auto ecfg = cfg.evolution();
  ecfg.T = cfg.dispersive_T;
  const auto g = ecfg.grid();
  FieldState<double> h0 = perturbation_f0(cfg, g);
  if (cfg.f0 == Perturbation::none)
    for (Eigen::Index i = 0; i < g.n; ++i) {
      const double s = g.x(i) - 1;
      h0.values(i, 0) = std::exp(-s * s);
    }
  std::vector<std::string> header{"t"};
  std::vector<DispersiveResult> results;
  json fits = json::array();
  for (double beta : cfg.betas)
    for (auto v : {DispersiveVariant::plain, DispersiveVariant::resolvent_shifted, DispersiveVariant::unprojected}) {
      results.push_back(dispersive_decay_check(lin, h0, ecfg, v, beta, cfg.fit_t0));
      header.push_back(std::string(to_string(v)) + "_beta" + format_number(beta));
      auto j = to_json(results.back().fit);
      j["variant"] = to_string(v);
      j["beta"] = beta;
      j["decays"] = results.back().decays;
      fits.push_back(j);
    }
  CsvTable csv(header);
  for (std::size_t i = 0; i < results.front().t.size(); ++i) {
    std::vector<double> row{results.front().t[i]};
    for (const auto &res : results) row.push_back(res.norm[i]);
    csv.row(row);
  }
  write_atomic(r.directory / "dispersive.csv", csv.str());
  r.manifest = {{"command", "dispersive"}, {"soliton", classification(lin)}, {"fits", fits}, {"config", echo_config(cfg)},
                {"run_info", run_info()}};
  write_manifest(r);
  return r;
}

int run_command(const std::string &name, const std::string &config_path, std::ostream &log) {
  try {
    const auto cfg = load_config(config_path);
    CommandResult r;
    if (name == "spectrum") r = cmd_spectrum(cfg);
    else if (name == "fgr") r = cmd_fgr(cfg);
    else if (name == "evolve") r = cmd_evolve(cfg);
    else if (name == "dispersive") r = cmd_dispersive(cfg);
    else {
      log << "unknown command: " << name << "\n";
      return exit_config;
    }
    if (r.manifest.contains("warning")) log << "warning: " << r.manifest["warning"].get<std::string>() << "\n";
    log << name << ": wrote " << r.directory.string() << "\n";
    return r.exit_code;
  } catch (const config_error &e) {
    log << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const numerical_error &e) {
    log << "numerical guard: " << e.what() << "\n";
    return exit_guard;
  }
}

} // namespace soliton
