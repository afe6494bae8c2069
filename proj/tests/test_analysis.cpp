#include "doctest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mipt/analysis.hpp"

using namespace mipt::analysis;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<SeriesPoint> log_series(double a, double b, const std::vector<double>& xs) {
  std::vector<SeriesPoint> pts;
  for (double x : xs) pts.push_back({x, a + b * std::log(x)});
  return pts;
}

std::vector<SeriesPoint> power_series(double a, double b, double c,
                                      const std::vector<double>& xs) {
  std::vector<SeriesPoint> pts;
  for (double x : xs) pts.push_back({x, a + b * std::pow(x, -c)});
  return pts;
}

const std::vector<double> kSizes = {8, 12, 16, 24, 32, 48, 64, 96, 128};

} // namespace

TEST_SUITE_BEGIN("analysis");

TEST_CASE("logarithmic fit recovers synthetic data") {
  const FitResult fit = fit_log_law(log_series(0.5, 0.04, kSizes));
  CHECK(fit.params.at("a") == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.params.at("b") == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(fit.params.at("c_eff") == doctest::Approx(0.12).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.residuals.size() == kSizes.size());
  for (double r : fit.residuals) CHECK(std::abs(r) < 1e-12);
}

TEST_CASE("logarithmic fit handles constant data and bad input") {
  std::vector<SeriesPoint> flat;
  for (double x : {10.0, 20.0, 40.0}) flat.push_back({x, 0.7});
  const FitResult fit = fit_log_law(flat);
  CHECK(fit.params.at("b") == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(fit.params.at("a") == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(fit.r_squared == 1.0);

  CHECK_THROWS_AS(fit_log_law({{10, 1}, {20, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_log_law({{10, 1}, {10, 2}, {10, 3}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_log_law({{-5, 1}, {20, 2}, {40, 3}}), std::invalid_argument);
}

TEST_CASE("power-law fit recovers synthetic parameter sets") {
  const std::vector<std::array<double, 3>> truths = {{0.1, 0.5, 0.8},  {0.3, -0.4, 0.3},
                                                     {1.2, 2.0, 1.5},  {0.0, 1.0, 0.1},
                                                     {0.5, 0.2, 2.0},  {2.0, -3.0, 0.799}};
  for (const auto& t : truths) {
    CAPTURE(t[0]);
    CAPTURE(t[2]);
    const FitResult fit = fit_power_law(power_series(t[0], t[1], t[2], kSizes));
    CHECK(fit.converged);
    CHECK(std::abs(fit.params.at("a") - t[0]) < 1e-8);
    CHECK(std::abs(fit.params.at("b") - t[1]) < 1e-7);
    CHECK(std::abs(fit.params.at("c") - t[2]) < 1e-7);
    CHECK(fit.r_squared > 1.0 - 1e-12);
  }
}

TEST_CASE("power-law fit is independent of input order") {
  std::vector<SeriesPoint> pts = power_series(0.3, 0.9, 0.6, kSizes);
  const FitResult sorted_fit = fit_power_law(pts);
  std::reverse(pts.begin(), pts.end());
  std::swap(pts[1], pts[4]);
  const FitResult shuffled_fit = fit_power_law(pts);
  CHECK(sorted_fit.params.at("c") ==
        doctest::Approx(shuffled_fit.params.at("c")).epsilon(1e-10));
  CHECK_THROWS_AS(fit_power_law({{8, 1}, {16, 2}, {32, 3}}), std::invalid_argument);
}

TEST_CASE("mutual information fit on the theory curve") {
  const double c_true = 0.5;
  std::vector<SeriesPoint> pts;
  for (double l : {2.0, 4.0, 6.0, 8.0}) {
    const double ratio = l / 198.0;
    pts.push_back({ratio, theory_mutual_information(c_true, ratio)});
  }
  const FitResult fit = fit_mutual_information(pts);
  CHECK(fit.params.at("eta") == doctest::Approx(2.0).epsilon(2e-3));
  CHECK(fit.params.at("c_eff_curve") == doctest::Approx(c_true).epsilon(1e-12));
  CHECK(fit.params.at("c_eff_from_amplitude") == doctest::Approx(c_true).epsilon(2e-2));
  CHECK(fit.r_squared > 0.999);

  CHECK_THROWS_AS(fit_mutual_information({{0.3, 0.1}, {0.4, 0.2}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_mutual_information({{0.05, -0.1}, {0.1, 0.2}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_mutual_information({{0.05, 0.1}}), std::invalid_argument);
}

TEST_CASE("theory curves") {
  // small-ratio expansion: I = (pi^2/3) c x^2 + O(x^4)
  for (double x : {0.01, 0.02, 0.05}) {
    const double quad = kPi * kPi / 3.0 * x * x;
    CHECK(std::abs(theory_mutual_information(1.0, x) - quad) <
          1.1 * std::pow(kPi, 4) / 9.0 * std::pow(x, 4));
  }
  CHECK(theory_mutual_information(2.0, 0.1) ==
        doctest::Approx(2.0 * theory_mutual_information(1.0, 0.1)).epsilon(1e-13));
  CHECK_THROWS_AS(theory_mutual_information(1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(theory_mutual_information(1.0, 0.5), std::domain_error);

  const double mid = theory_chord_entropy(1.0, 50.0, 100.0, 0.25);
  CHECK(mid == doctest::Approx(std::log(200.0 / kPi) / 6.0 + 0.25).epsilon(1e-13));
  for (double l : {10.0, 30.0, 45.0}) {
    CHECK(theory_chord_entropy(0.8, l, 100.0, 0.1) ==
          doctest::Approx(theory_chord_entropy(0.8, 100.0 - l, 100.0, 0.1)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(theory_chord_entropy(1.0, 0.0, 100.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(theory_chord_entropy(1.0, 100.0, 100.0, 0.0), std::domain_error);
}

TEST_CASE("data collapse separates the true scaling") {
  // family built with the logarithmic scaling variable
  const auto family = [](double scaled) { return 0.3 + 0.8 * scaled; };
  std::vector<CollapseCurve> curves;
  for (double size : {20.0, 40.0, 80.0}) {
    CollapseCurve curve;
    curve.system_size = size;
    for (double d = 0.0; d <= 0.201; d += 0.02) {
      curve.points.push_back({d, family((d - 0.1) * std::log(size))});
    }
    curves.push_back(curve);
  }
  CHECK(data_collapse(curves, 0.1, CollapseScaling::log_L) < 1e-10);
  CHECK(data_collapse(curves, 0.1, CollapseScaling::power_L, 1.0) > 1e-4);
}

TEST_CASE("data collapse of identical curves vanishes") {
  std::vector<CollapseCurve> curves;
  for (double size : {16.0, 16.0, 16.0}) {
    CollapseCurve curve;
    curve.system_size = size;
    for (double d = -0.2; d <= 0.201; d += 0.1) curve.points.push_back({d, d * d + 0.4});
    curves.push_back(curve);
  }
  CHECK(data_collapse(curves, 0.0, CollapseScaling::log_L) < 1e-15);
  CHECK(data_collapse(curves, 0.0, CollapseScaling::power_L, 2.0) < 1e-15);
}

TEST_CASE("data collapse input validation") {
  std::vector<CollapseCurve> curves(3);
  for (int i = 0; i < 3; ++i) {
    curves[i].system_size = 10.0 * (i + 1);
    curves[i].points = {{0.0, 1.0}, {0.1, 2.0}};
  }
  CHECK_THROWS_AS(data_collapse(curves, 0.0, CollapseScaling::power_L, -1.0),
                  std::invalid_argument);
  std::vector<CollapseCurve> two(curves.begin(), curves.begin() + 2);
  CHECK_THROWS_AS(data_collapse(two, 0.0, CollapseScaling::log_L), std::invalid_argument);
  curves[1].points = {{5.0, 1.0}, {5.1, 2.0}}; // shifted far away: no overlap
  CHECK_THROWS_AS(data_collapse(curves, 0.0, CollapseScaling::log_L), std::invalid_argument);
  curves[1].points = {{0.05, 1.0}};
  CHECK_THROWS_AS(data_collapse(curves, 0.0, CollapseScaling::log_L), std::invalid_argument);
}

TEST_SUITE_END();
