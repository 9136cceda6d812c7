#include "soliton/fit.hpp"

#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace soliton {

double FitResult::param(const std::string &name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return params[i];
  throw std::out_of_range("fit: no parameter " + name);
}

double FitResult::half_width(const std::string &name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return ci[i];
  throw std::out_of_range("fit: no parameter " + name);
}

LineFit fit_line(const std::vector<double> &x, const std::vector<double> &y) {
  const std::size_t n = x.size();
  if (n < 3 || y.size() != n)
    throw std::invalid_argument("fit_line: need at least three samples");
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    A(i, 0) = x[i];
    A(i, 1) = 1;
    b(i) = y[i];
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  const Eigen::VectorXd r = A * c - b;
  const double s2 = r.squaredNorm() / double(n - 2);
  const Eigen::Matrix2d cov = s2 * (A.transpose() * A).inverse();
  return {c(0), c(1), std::sqrt(cov(0, 0)), std::sqrt(r.squaredNorm() / double(n))};
}

FitResult fit_loglog(const std::string &model, const std::vector<double> &t, const std::vector<double> &v, double t0, double t1) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] > t1 || !(t[i] > 0) || !(std::abs(v[i]) > 0)) continue;
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(std::abs(v[i])));
  }
  FitResult f;
  f.model = model;
  f.names = {"exponent", "log_prefactor"};
  f.t0 = t0;
  f.t1 = t1;
  f.samples = int(lx.size());
  if (lx.size() < 3) {
    f.note = "fit window too short";
    f.params = {std::nan(""), std::nan("")};
    f.ci = {std::nan(""), std::nan("")};
    return f;
  }
  const LineFit l = fit_line(lx, ly);
  f.params = {l.slope, l.intercept};
  f.ci = {1.96 * l.slope_se, std::nan("")};
  f.rms = l.rms;
  f.ok = true;
  return f;
}

namespace {

struct CurveFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  using QRSolver = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const Model *model;
  const std::vector<double> *t, *y;
  int np;

  int inputs() const { return np; }
  int values() const { return int(t->size()); }

  int operator()(const Eigen::VectorXd &p, Eigen::VectorXd &r) const {
    for (std::size_t i = 0; i < t->size(); ++i) r(i) = (*model)(p, (*t)[i]) - (*y)[i];
    return 0;
  }
};

} // namespace

FitResult fit_curve(const std::string &model_name, const std::vector<std::string> &names, const Model &model, Eigen::VectorXd guess,
                    const std::vector<double> &t, const std::vector<double> &y, double t0, double t1) {
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= t0 && t[i] <= t1 && std::isfinite(y[i])) {
      ts.push_back(t[i]);
      ys.push_back(y[i]);
    }
  FitResult f;
  f.model = model_name;
  f.names = names;
  f.t0 = t0;
  f.t1 = t1;
  f.samples = int(ts.size());
  const int np = int(guess.size());
  if (int(ts.size()) <= np + 1) {
    f.note = "fit window too short";
    f.params.assign(np, std::nan(""));
    f.ci.assign(np, std::nan(""));
    return f;
  }
  CurveFunctor base{&model, &ts, &ys, np};
  Eigen::NumericalDiff<CurveFunctor, Eigen::Central> diff(base);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<CurveFunctor, Eigen::Central>> lm(diff);
  lm.setMaxfev(4000);
  lm.setXtol(1e-14);
  lm.setFtol(1e-14);
  const auto status = lm.minimize(guess);
  Eigen::VectorXd r(ts.size());
  base(guess, r);
  Eigen::MatrixXd J(ts.size(), np);
  diff.df(guess, J);
  const double s2 = r.squaredNorm() / double(ts.size() - np);
  const Eigen::MatrixXd cov = s2 * (J.transpose() * J).completeOrthogonalDecomposition().pseudoInverse();
  f.params.resize(np);
  f.ci.resize(np);
  for (int k = 0; k < np; ++k) {
    f.params[k] = guess(k);
    f.ci[k] = 1.96 * std::sqrt(std::max(0.0, cov(k, k)));
  }
  f.rms = std::sqrt(r.squaredNorm() / double(ts.size()));
  f.ok = guess.allFinite() && status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters;
  if (!f.ok) f.note = "least squares did not converge";
  return f;
}

namespace {

double periodogram(const std::vector<double> &t, const std::vector<double> &y, double mean, double w) {
  std::complex<double> s(0);
  const double T0 = t.front(), T1 = t.back();
  const double pi = std::acos(-1.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double hann = 0.5 - 0.5 * std::cos(2 * pi * (t[i] - T0) / (T1 - T0));
    s += hann * (y[i] - mean) * std::polar(1.0, -w * t[i]);
  }
  return std::norm(s);
}

} // namespace

double spectral_peak(const std::vector<double> &t, const std::vector<double> &y, double wmin, double wmax) {
  if (t.size() < 8)
    throw std::invalid_argument("spectral_peak: too few samples");
  double mean = 0;
  for (double v : y) mean += v;
  mean /= double(y.size());
  const double span = t.back() - t.front();
  const int n = std::max(200, int(16 * (wmax - wmin) * span));
  double best = wmin, pbest = -1;
  for (int k = 0; k <= n; ++k) {
    const double w = wmin + (wmax - wmin) * k / n;
    const double p = periodogram(t, y, mean, w);
    if (p > pbest) {
      pbest = p;
      best = w;
    }
  }
  // golden-section refinement inside one grid cell on each side
  double a = std::max(wmin, best - (wmax - wmin) / n), b = std::min(wmax, best + (wmax - wmin) / n);
  const double g = (std::sqrt(5.0) - 1) / 2;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = periodogram(t, y, mean, c), fd = periodogram(t, y, mean, d);
  for (int it = 0; it < 80; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = periodogram(t, y, mean, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = periodogram(t, y, mean, d);
    }
  }
  return (a + b) / 2;
}

} // namespace soliton
