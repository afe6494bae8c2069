#include "mipt/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace mipt::analysis {
namespace {

constexpr double kPi = 3.14159265358979323846;

struct Ols {
  double intercept = 0.0;
  double slope = 0.0;
};

Ols ols_line(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double n = static_cast<double>(x.size());
  const double mx = x.mean();
  const double my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  if (sxx <= 0.0) throw std::invalid_argument("fit requires at least two distinct x values");
  const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
  (void)n;
  Ols o;
  o.slope = sxy / sxx;
  o.intercept = my - o.slope * mx;
  return o;
}

double r_squared_of(const Eigen::VectorXd& y, const Eigen::VectorXd& resid) {
  const double ss_tot = (y.array() - y.mean()).square().sum();
  // constant data fits perfectly; the threshold absorbs the rounding
  // noise of the mean subtraction
  if (ss_tot <= 1e-28 * std::max(1.0, y.squaredNorm())) return 1.0;
  return 1.0 - resid.squaredNorm() / ss_tot;
}

void check_positive_x(const std::vector<SeriesPoint>& data, const char* what) {
  for (const SeriesPoint& p : data) {
    if (!(p.x > 0.0)) throw std::invalid_argument(std::string(what) + " requires positive x");
  }
}

int distinct_x(const std::vector<SeriesPoint>& data) {
  std::set<double> xs;
  for (const SeriesPoint& p : data) xs.insert(p.x);
  return static_cast<int>(xs.size());
}

} // namespace

FitResult fit_log_law(const std::vector<SeriesPoint>& data) {
  if (data.size() < 3 || distinct_x(data) < 3) {
    throw std::invalid_argument("log-law fit needs at least 3 points with distinct x");
  }
  check_positive_x(data, "log-law fit");
  const int n = static_cast<int>(data.size());
  Eigen::VectorXd lx(n), y(n);
  for (int i = 0; i < n; ++i) {
    lx(i) = std::log(data[i].x);
    y(i) = data[i].y;
  }
  const Ols o = ols_line(lx, y);
  FitResult res;
  res.model = FitModel::log_law;
  res.params["a"] = o.intercept;
  res.params["b"] = o.slope;
  res.params["c_eff"] = 3.0 * o.slope;
  Eigen::VectorXd r = y - (o.intercept + (o.slope * lx.array())).matrix();
  res.r_squared = r_squared_of(y, r);
  res.residuals.assign(r.data(), r.data() + n);
  res.iterations = 1;
  return res;
}

FitResult fit_power_law(const std::vector<SeriesPoint>& data) {
  if (data.size() < 4 || distinct_x(data) < 4) {
    throw std::invalid_argument("power-law fit needs at least 4 points with distinct x");
  }
  check_positive_x(data, "power-law fit");
  std::vector<SeriesPoint> pts = data;
  std::sort(pts.begin(), pts.end(),
            [](const SeriesPoint& a, const SeriesPoint& b) { return a.x < b.x; });
  const int n = static_cast<int>(pts.size());
  Eigen::VectorXd x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x(i) = pts[i].x;
    y(i) = pts[i].y;
  }

  // initial decay power from the successive-difference slope:
  // dS/dL ~ -b c L^{-c-1}, so the log-log slope of |dS/dL| is -(c+1)
  std::vector<double> lm, ld;
  for (int i = 0; i + 1 < n; ++i) {
    const double d = (y(i + 1) - y(i)) / (x(i + 1) - x(i));
    if (std::abs(d) > 0.0) {
      lm.push_back(std::log(std::sqrt(x(i) * x(i + 1))));
      ld.push_back(std::log(std::abs(d)));
    }
  }
  double c = 1.0;
  if (lm.size() >= 2) {
    const Ols o = ols_line(Eigen::Map<Eigen::VectorXd>(lm.data(), lm.size()),
                           Eigen::Map<Eigen::VectorXd>(ld.data(), ld.size()));
    c = std::max(-o.slope - 1.0, 0.05);
  }
  Eigen::MatrixXd xab(n, 2);
  xab.col(0).setOnes();
  xab.col(1) = x.array().pow(-c);
  const Eigen::Vector2d ab = xab.colPivHouseholderQr().solve(y);
  Eigen::Vector3d p(ab(0), ab(1), c);

  const auto model = [&](const Eigen::Vector3d& q) {
    return (q(0) + q(1) * x.array().pow(-q(2))).matrix();
  };
  double lambda = 1e-3;
  bool converged = false;
  int iters = 0;
  Eigen::VectorXd r = y - model(p);
  for (int it = 0; it < 200; ++it) {
    iters = it + 1;
    const Eigen::ArrayXd lc = x.array().pow(-p(2));
    Eigen::MatrixXd j(n, 3);
    j.col(0).setOnes();
    j.col(1) = lc;
    j.col(2) = -p(1) * x.array().log() * lc;
    Eigen::Matrix3d jtj = j.transpose() * j;
    jtj.diagonal().array() += lambda;
    const Eigen::Vector3d step = jtj.ldlt().solve(j.transpose() * r);
    const Eigen::Vector3d trial = p + step;
    const Eigen::VectorXd rt = y - model(trial);
    if (rt.squaredNorm() <= r.squaredNorm()) {
      p = trial;
      r = rt;
      lambda = std::max(lambda * 0.3, 1e-12);
    } else {
      lambda *= 10.0;
    }
    if (step.norm() < 1e-10) {
      converged = true;
      break;
    }
  }

  FitResult res;
  res.model = FitModel::power_law;
  res.params["a"] = p(0);
  res.params["b"] = p(1);
  res.params["c"] = p(2);
  res.converged = converged;
  res.iterations = iters;
  res.r_squared = r_squared_of(y, r);
  res.residuals.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    res.residuals[i] = data[i].y - (p(0) + p(1) * std::pow(data[i].x, -p(2)));
  }
  return res;
}

FitResult fit_mutual_information(const std::vector<SeriesPoint>& data) {
  if (data.size() < 2 || distinct_x(data) < 2) {
    throw std::invalid_argument("mutual-information fit needs at least 2 distinct ratios");
  }
  for (const SeriesPoint& p : data) {
    if (!(p.x > 0.0) || p.x > 0.2 + 1e-12) {
      throw std::invalid_argument("mutual-information fit expects ratios in (0, 0.2]");
    }
    if (!(p.y > 0.0)) {
      throw std::invalid_argument("mutual-information fit expects positive values");
    }
  }
  const int n = static_cast<int>(data.size());
  Eigen::VectorXd lx(n), ly(n);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    lx(i) = std::log(data[i].x);
    ly(i) = std::log(data[i].y);
    const double g = theory_mutual_information(1.0, data[i].x);
    num += data[i].y * g;
    den += g * g;
  }
  const Ols o = ols_line(lx, ly);
  const double amplitude = std::exp(o.intercept);

  FitResult res;
  res.model = FitModel::mutual_information;
  res.params["eta"] = o.slope;
  res.params["amplitude"] = amplitude;
  res.params["c_eff_from_amplitude"] = amplitude / (kPi * kPi / 3.0);
  res.params["c_eff_curve"] = num / den;
  Eigen::VectorXd y(n), r(n);
  for (int i = 0; i < n; ++i) {
    y(i) = data[i].y;
    r(i) = data[i].y - amplitude * std::pow(data[i].x, o.slope);
  }
  res.r_squared = r_squared_of(y, r);
  res.residuals.assign(r.data(), r.data() + n);
  res.iterations = 1;
  return res;
}

double theory_mutual_information(double c_eff, double ratio) {
  if (!(ratio > 0.0) || !(ratio < 0.5)) {
    throw std::domain_error("mutual-information curve is defined for ratio in (0, 1/2)");
  }
  const double c = std::cos(kPi * ratio);
  return -(c_eff / 3.0) * std::log(c * c);
}

double theory_chord_entropy(double c_eff, double subsystem, double total,
                            double additive_const) {
  if (!(total > 0.0) || !(subsystem > 0.0) || !(subsystem < total)) {
    throw std::domain_error("chord entropy needs 0 < subsystem < total");
  }
  const double chord = (2.0 * total / kPi) * std::sin(kPi * subsystem / total);
  return (c_eff / 6.0) * std::log(chord) + additive_const;
}

double data_collapse(const std::vector<CollapseCurve>& curves, double critical,
                     CollapseScaling scaling, double nu) {
  if (curves.size() < 3) throw std::invalid_argument("collapse needs at least 3 curves");
  if (!(nu > 0.0)) throw std::invalid_argument("collapse exponent nu must be positive");

  struct Scaled {
    std::vector<double> x, y;
  };
  std::vector<Scaled> scaled;
  double lo = -1e300, hi = 1e300;
  for (const CollapseCurve& curve : curves) {
    if (!(curve.system_size > 1.0)) {
      throw std::invalid_argument("collapse curves need system_size > 1");
    }
    if (curve.points.size() < 2) {
      throw std::invalid_argument("each collapse curve needs at least 2 points");
    }
    const double factor = scaling == CollapseScaling::log_L
                              ? std::log(curve.system_size)
                              : std::pow(curve.system_size, 1.0 / nu);
    Scaled s;
    std::vector<SeriesPoint> pts = curve.points;
    std::sort(pts.begin(), pts.end(),
              [](const SeriesPoint& a, const SeriesPoint& b) { return a.x < b.x; });
    for (const SeriesPoint& p : pts) {
      s.x.push_back((p.x - critical) * factor);
      s.y.push_back(p.y);
    }
    lo = std::max(lo, s.x.front());
    hi = std::min(hi, s.x.back());
    scaled.push_back(std::move(s));
  }
  if (!(hi > lo)) {
    throw std::invalid_argument("collapse curves have no overlapping scaled range");
  }

  const int grid = 101;
  const auto interp = [](const Scaled& s, double t) {
    const auto it = std::upper_bound(s.x.begin(), s.x.end(), t);
    std::size_t k = it == s.x.begin() ? 0 : static_cast<std::size_t>(it - s.x.begin()) - 1;
    if (k + 1 >= s.x.size()) k = s.x.size() - 2;
    const double dx = s.x[k + 1] - s.x[k];
    if (dx <= 0.0) return s.y[k];
    const double w = (t - s.x[k]) / dx;
    return (1.0 - w) * s.y[k] + w * s.y[k + 1];
  };

  const int nc = static_cast<int>(scaled.size());
  double cross = 0.0;
  std::vector<double> mean_curve(grid);
  for (int g = 0; g < grid; ++g) {
    const double t = lo + (hi - lo) * g / (grid - 1);
    double mean = 0.0;
    for (const Scaled& s : scaled) mean += interp(s, t);
    mean /= nc;
    double var = 0.0;
    for (const Scaled& s : scaled) {
      const double d = interp(s, t) - mean;
      var += d * d;
    }
    cross += var / nc;
    mean_curve[g] = mean;
  }
  cross /= grid;

  double mbar = 0.0;
  for (double v : mean_curve) mbar += v;
  mbar /= grid;
  double var_mean = 0.0;
  for (double v : mean_curve) var_mean += (v - mbar) * (v - mbar);
  var_mean /= grid;
  if (var_mean < 1e-300) return cross;
  return cross / var_mean;
}

} // namespace mipt::analysis
