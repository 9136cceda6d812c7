#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace soliton {

struct FitResult {
  std::string model;
  std::vector<std::string> names;
  std::vector<double> params;
  std::vector<double> ci; // 95% half-widths
  double t0 = 0, t1 = 0;
  double rms = 0;
  int samples = 0;
  bool ok = false;
  std::string note;

  double param(const std::string &name) const;
  double half_width(const std::string &name) const;
};

struct LineFit {
  double slope = 0, intercept = 0;
  double slope_se = 0;
  double rms = 0;
};

// Least squares y = slope x + intercept.
LineFit fit_line(const std::vector<double> &x, const std::vector<double> &y);

// Slope of log|v| against log t on [t0, t1].
FitResult fit_loglog(const std::string &model, const std::vector<double> &t, const std::vector<double> &v, double t0, double t1);

using Model = std::function<double(const Eigen::VectorXd &, double)>;

// Levenberg-Marquardt least squares of `model` to (t, y) samples in [t0, t1].
FitResult fit_curve(const std::string &model_name, const std::vector<std::string> &names, const Model &model, Eigen::VectorXd guess,
                    const std::vector<double> &t, const std::vector<double> &y, double t0, double t1);

// Angular frequency of the largest periodogram peak of y(t) in [wmin, wmax].
double spectral_peak(const std::vector<double> &t, const std::vector<double> &y, double wmin, double wmax);

} // namespace soliton
