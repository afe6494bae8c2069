#pragma once

#include <map>
#include <string>
#include <vector>

// Curve fitting and finite-size diagnostics for entropy data.

namespace mipt::analysis {

struct SeriesPoint {
  double x = 0.0;
  double y = 0.0;
};

enum class FitModel { log_law, power_law, mutual_information };

struct FitResult {
  FitModel model;
  std::map<std::string, double> params;
  double r_squared = 0.0;
  std::vector<double> residuals; // data minus model, input order
  bool converged = true;
  int iterations = 0;
};

// S = a + b ln L by least squares; params a, b, c_eff (= 3b)
FitResult fit_log_law(const std::vector<SeriesPoint>& data);

// S = a + b L^-c by damped Gauss-Newton with a slope-based
// initialization; params a, b, c; converged=false when the iteration
// fails to settle (last iterate still reported)
FitResult fit_power_law(const std::vector<SeriesPoint>& data);

// log-log fit of mutual information vs region ratio (ratio <= 0.2);
// params eta (decay power), amplitude, c_eff_from_amplitude, and
// c_eff_curve (one-parameter match against the full theory curve)
FitResult fit_mutual_information(const std::vector<SeriesPoint>& data);

// I(A:B) = -(c_eff/3) ln cos^2(pi ratio), antipodal same-size regions,
// valid for ratio in (0, 1/2)
double theory_mutual_information(double c_eff, double ratio);

// S(l) = (c_eff/6) ln[(2 L/pi) sin(pi l / L)] + const, periodic chain
double theory_chord_entropy(double c_eff, double subsystem, double total, double additive_const);

enum class CollapseScaling { log_L, power_L };

struct CollapseCurve {
  double system_size = 0.0;
  std::vector<SeriesPoint> points; // x = tuning parameter, y = observable
};

// scaled coordinate (x - critical) * ln L or (x - critical) * L^(1/nu);
// returns the cross-curve variance on a common grid, normalized by the
// variance of the mean curve (0 = perfect collapse)
double data_collapse(const std::vector<CollapseCurve>& curves, double critical,
                     CollapseScaling scaling, double nu = 1.0);

} // namespace mipt::analysis
