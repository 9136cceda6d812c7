#include "soliton/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace soliton {

config_error::config_error(int line, std::string field, const std::string &message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + field + ": " + message), line_(line),
      field_(std::move(field)) {}

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double number(const std::string &s, int line, const std::string &field) {
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    throw config_error(line, field, "expected a finite number, got '" + s + "'");
  return v;
}

long integer(const std::string &s, int line, const std::string &field) {
  long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw config_error(line, field, "expected an integer, got '" + s + "'");
  return v;
}

std::vector<double> numbers(const std::string &s, int line, const std::string &field) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(number(trim(item), line, field));
  if (out.empty())
    throw config_error(line, field, "expected a comma-separated list of numbers");
  return out;
}

std::string join(const std::vector<double> &v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

struct Key {
  std::string section, name;
  std::function<void(ExperimentConfig &, const std::string &, int, const std::string &)> set;
  std::function<std::optional<std::string>(const ExperimentConfig &)> get;
};

Key real(const std::string &sec, const std::string &name, double ExperimentConfig::*m) {
  return {sec, name, [m](ExperimentConfig &c, const std::string &v, int l, const std::string &f) { c.*m = number(v, l, f); },
          [m](const ExperimentConfig &c) -> std::optional<std::string> { return fmt(c.*m); }};
}

Key maybe_real(const std::string &sec, const std::string &name, std::optional<double> ExperimentConfig::*m) {
  return {sec, name, [m](ExperimentConfig &c, const std::string &v, int l, const std::string &f) { c.*m = number(v, l, f); },
          [m](const ExperimentConfig &c) -> std::optional<std::string> {
            if (!(c.*m)) return std::nullopt;
            return fmt(*(c.*m));
          }};
}

const std::vector<Key> &keys() {
  static const std::vector<Key> k = {
      {"nonlinearity", "coefficients",
       [](ExperimentConfig &c, const std::string &v, int l, const std::string &f) { c.coefficients = numbers(v, l, f); },
       [](const ExperimentConfig &c) -> std::optional<std::string> { return join(c.coefficients); }},
      {"nonlinearity", "branch",
       [](ExperimentConfig &c, const std::string &v, int l, const std::string &f) { c.branch = int(integer(v, l, f)); },
       [](const ExperimentConfig &c) -> std::optional<std::string> { return std::to_string(c.branch); }},
      maybe_real("soliton", "omega", &ExperimentConfig::omega),
      maybe_real("soliton", "C", &ExperimentConfig::C),
      real("soliton", "theta", &ExperimentConfig::theta),
      real("grid", "dx", &ExperimentConfig::dx),
      real("grid", "L", &ExperimentConfig::L),
      real("time", "dt", &ExperimentConfig::dt),
      real("time", "T", &ExperimentConfig::T),
      real("time", "log_every", &ExperimentConfig::log_every),
      {"boundary", "type",
       [](ExperimentConfig &c, const std::string &v, int l, const std::string &f) {
         if (v == "dirichlet") c.boundary = Boundary::dirichlet;
         else if (v == "absorbing") c.boundary = Boundary::absorbing_layer;
         else throw config_error(l, f, "expected 'dirichlet' or 'absorbing', got '" + v + "'");
       },
       [](const ExperimentConfig &c) -> std::optional<std::string> {
         return c.boundary == Boundary::dirichlet ? "dirichlet" : "absorbing";
       }},
      real("boundary", "layer_width", &ExperimentConfig::layer_width),
      real("boundary", "layer_strength", &ExperimentConfig::layer_strength),
      {"perturbation", "z0_re",
       [](ExperimentConfig &c, const std::string &v, int l, const std::string &f) { c.z0.real(number(v, l, f)); },
       [](const ExperimentConfig &c) -> std::optional<std::string> { return fmt(c.z0.real()); }},
      {"perturbation", "z0_im",
       [](ExperimentConfig &c, const std::string &v, int l, const std::string &f) { c.z0.imag(number(v, l, f)); },
       [](const ExperimentConfig &c) -> std::optional<std::string> { return fmt(c.z0.imag()); }},
      {"perturbation", "f0",
       [](ExperimentConfig &c, const std::string &v, int l, const std::string &f) {
         if (v == "none") c.f0 = Perturbation::none;
         else if (v == "gaussian") c.f0 = Perturbation::gaussian;
         else throw config_error(l, f, "expected 'none' or 'gaussian', got '" + v + "'");
       },
       [](const ExperimentConfig &c) -> std::optional<std::string> { return c.f0 == Perturbation::none ? "none" : "gaussian"; }},
      real("perturbation", "f0_center", &ExperimentConfig::f0_center),
      real("perturbation", "f0_width", &ExperimentConfig::f0_width),
      real("perturbation", "f0_amplitude", &ExperimentConfig::f0_amplitude),
      real("perturbation", "jitter", &ExperimentConfig::jitter),
      {"perturbation", "seed",
       [](ExperimentConfig &c, const std::string &v, int l, const std::string &f) {
         const long s = integer(v, l, f);
         if (s < 0) throw config_error(l, f, "seed must be non-negative");
         c.seed = std::uint64_t(s);
       },
       [](const ExperimentConfig &c) -> std::optional<std::string> { return std::to_string(c.seed); }},
      real("fit", "t0", &ExperimentConfig::fit_t0),
      real("fit", "t1", &ExperimentConfig::fit_t1),
      real("fit", "beta", &ExperimentConfig::beta),
      real("fit", "scattering_every", &ExperimentConfig::scattering_every),
      real("scan", "C_min", &ExperimentConfig::C_min),
      real("scan", "C_max", &ExperimentConfig::C_max),
      {"scan", "C_count",
       [](ExperimentConfig &c, const std::string &v, int l, const std::string &f) { c.C_count = int(integer(v, l, f)); },
       [](const ExperimentConfig &c) -> std::optional<std::string> { return std::to_string(c.C_count); }},
      {"dispersive", "betas",
       [](ExperimentConfig &c, const std::string &v, int l, const std::string &f) { c.betas = numbers(v, l, f); },
       [](const ExperimentConfig &c) -> std::optional<std::string> { return join(c.betas); }},
      real("dispersive", "T", &ExperimentConfig::dispersive_T),
      {"output", "directory",
       [](ExperimentConfig &c, const std::string &v, int l, const std::string &f) {
         if (v.empty()) throw config_error(l, f, "empty output directory");
         c.output = v;
       },
       [](const ExperimentConfig &c) -> std::optional<std::string> { return c.output; }},
  };
  return k;
}

void validate(const ExperimentConfig &c, const std::vector<int> &line_of) {
  auto fail = [&](std::size_t key, const std::string &msg) {
    const auto &k = keys()[key];
    throw config_error(line_of[key], k.section + "." + k.name, msg);
  };
  auto index = [&](const std::string &name, const std::string &section = "") {
    for (std::size_t i = 0; i < keys().size(); ++i)
      if (keys()[i].name == name && (section.empty() || keys()[i].section == section)) return i;
    return std::size_t(0);
  };
  if (c.coefficients.empty() || std::all_of(c.coefficients.begin(), c.coefficients.end(), [](double v) { return v == 0; }))
    fail(index("coefficients"), "the nonlinearity must not vanish identically");
  if (c.omega.has_value() == c.C.has_value())
    fail(index(c.omega ? "C" : "omega"), "give exactly one of omega and C");
  if (c.omega && !(*c.omega > 0)) fail(index("omega"), "must be positive");
  if (c.C && !(*c.C > 0)) fail(index("C"), "must be positive");
  if (c.branch < 0) fail(index("branch"), "must be non-negative");
  if (!(c.dx > 0)) fail(index("dx"), "must be positive");
  if (!(c.L > 0)) fail(index("L"), "must be positive");
  if (!(c.dt > 0)) fail(index("dt"), "must be positive");
  if (!(c.T > 0)) fail(index("T"), "must be positive");
  if (!(c.log_every >= c.dt)) fail(index("log_every"), "must be at least dt");
  if (!(c.f0_width > 0)) fail(index("f0_width"), "must be positive");
  if (!(c.dispersive_T > 0)) fail(index("T", "dispersive"), "must be positive");
  if (c.boundary == Boundary::absorbing_layer && !(c.layer_width > 0 && c.layer_width < c.L / 2))
    fail(index("layer_width"), "must lie in (0, L/2)");
  if (c.layer_strength < 0) fail(index("layer_strength"), "must be non-negative");
  if (c.jitter < 0) fail(index("jitter"), "must be non-negative");
  if (c.fit_t0 < 5) fail(index("t0"), "fit windows start at t >= 5");
  if (c.fit_t1 != 0 && !(c.fit_t1 > c.fit_t0)) fail(index("t1"), "must exceed t0 (or be 0 for automatic)");
  if (c.beta < 2) fail(index("beta"), "must be at least 2");
  if (c.scattering_every < 0) fail(index("scattering_every"), "must be non-negative");
  if (!(c.C_min > 0 && c.C_max > c.C_min)) fail(index("C_max"), "need 0 < C_min < C_max");
  if (c.C_count < 2) fail(index("C_count"), "need at least two scan points");
  for (double b : c.betas)
    if (b < 2) fail(index("betas"), "every beta must be at least 2");
  try {
    c.evolution().validate();
    (void)c.soliton();
  } catch (const config_error &) {
    throw;
  } catch (const std::exception &e) {
    throw config_error(0, "soliton", e.what());
  }
}

} // namespace

EvolutionConfig<double> ExperimentConfig::evolution() const {
  EvolutionConfig<double> e;
  e.dx = dx;
  e.dt = dt;
  e.L = L;
  e.T = T;
  e.boundary = boundary;
  e.layer_width = layer_width;
  e.layer_strength = layer_strength;
  e.log_every = log_every;
  return e;
}

SolitonParams<double> ExperimentConfig::soliton() const {
  const auto nl = nonlinearity();
  if (omega) {
    const auto Cs = amplitudes_for_frequency(nl, *omega);
    if (branch >= int(Cs.size()))
      throw config_error(0, "nonlinearity.branch",
                         "only " + std::to_string(Cs.size()) + " solitary waves exist for omega = " + fmt(*omega));
    return {Cs[branch], *omega, theta};
  }
  const double a = eval_a(nl, *C * *C);
  if (!(a > 0))
    throw config_error(0, "soliton.C", "a(C^2) must be positive for a solitary wave");
  return {*C, a * a / 4, theta};
}

ExperimentConfig parse_config(const std::string &text) {
  ExperimentConfig c;
  c.omega.reset();
  c.C.reset();
  std::vector<int> line_of(keys().size(), 0);
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find_first_of("#;");
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw config_error(line, s, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      bool known = false;
      for (const auto &k : keys()) known |= k.section == section;
      if (!known) throw config_error(line, section, "unknown section");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw config_error(line, s, "expected key = value");
    const std::string name = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
    const std::string field = section + "." + name;
    std::size_t i = 0;
    for (; i < keys().size(); ++i)
      if (keys()[i].section == section && keys()[i].name == name) break;
    if (i == keys().size()) throw config_error(line, field, "unknown key");
    if (line_of[i]) throw config_error(line, field, "duplicate key (first set on line " + std::to_string(line_of[i]) + ")");
    if (value.empty()) throw config_error(line, field, "missing value");
    keys()[i].set(c, value, line, field);
    line_of[i] = line;
  }
  if (!c.omega && !c.C) c.omega = 0.25;
  validate(c, line_of);
  return c;
}

ExperimentConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw config_error(0, path, "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string echo_config(const ExperimentConfig &cfg) {
  std::string out, section;
  for (const auto &k : keys()) {
    const auto v = k.get(cfg);
    if (!v) continue;
    if (k.section != section) {
      out += (section.empty() ? "" : "\n") + std::string("[") + k.section + "]\n";
      section = k.section;
    }
    out += k.name + " = " + *v + "\n";
  }
  return out;
}

} // namespace soliton
