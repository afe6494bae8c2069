#include "doctest.h"

#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>

#include "mipt/vqa.hpp"

using namespace mipt;
using namespace mipt::vqa;
using cxd = std::complex<double>;

namespace {

ModelSpec open_chain(int n, double delta) {
  return {n, lattice::Boundary::open, delta, 1.0, 0.5};
}

MeasurementSpec staggered(double w) {
  MeasurementSpec m;
  m.kind = MeasurementKind::density_staggered;
  m.strength = w;
  return m;
}

// deterministic non-symmetric parameter vector
Eigen::VectorXd wiggle(int np, double scale) {
  Eigen::VectorXd th(np);
  for (int i = 0; i < np; ++i) th(i) = scale * std::sin(0.7 * i + 0.3);
  return th;
}

DenseState basis_state(int n, int mask) {
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(std::int64_t{1} << n);
  amps(mask) = 1.0;
  return {amps, n};
}

} // namespace

TEST_SUITE_BEGIN("vqa");

TEST_CASE("parameter count per layer") {
  CHECK(parameter_count({2, 1}) == 10);   // 1 bond block (3) + 6 singles + seed
  CHECK(parameter_count({6, 6}) == 199);
  CHECK(parameter_count({8, 8}) == 361);
  CHECK_THROWS_AS(parameter_count({(1), 1}), std::invalid_argument);
  CHECK_THROWS_AS(parameter_count({4, 0}), std::invalid_argument);
}

TEST_CASE("zero parameters give the identity circuit") {
  const AnsatzSpec spec{4, 2};
  const DenseState base = ed::ground_state_ed(open_chain(4, 0.0));
  const DenseState out = ansatz_state(spec, Eigen::VectorXd::Zero(parameter_count(spec)), base);
  CHECK((out.amplitudes - base.amplitudes).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("seed-trick initialization cancels exactly") {
  const AnsatzSpec spec{6, 6};
  const DenseState base = ed::ground_state_ed(open_chain(6, 0.0));
  const Eigen::VectorXd theta = initial_theta(spec, true);
  CHECK(theta(0) == 0.5);
  CHECK(theta.cwiseAbs().sum() == doctest::Approx(1.0)); // exactly two entries
  const DenseState out = ansatz_state(spec, theta, base);
  CHECK((out.amplitudes - base.amplitudes).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("bond rotation acts as expected on a basis state") {
  // parameter 1 is the first xx rotation; at theta = pi/2 it maps
  // |00> to i |11>
  const AnsatzSpec spec{2, 1};
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(parameter_count(spec));
  theta(1) = 3.14159265358979323846 / 2.0;
  const DenseState out = ansatz_state(spec, theta, basis_state(2, 0));
  CHECK(std::abs(out.amplitudes(0)) < 1e-12);
  CHECK(std::abs(out.amplitudes(3) - cxd(0.0, 1.0)) < 1e-12);
}

TEST_CASE("circuit preserves the norm") {
  const AnsatzSpec spec{5, 3};
  const DenseState base = basis_state(5, 0b10110);
  const DenseState out = ansatz_state(spec, wiggle(parameter_count(spec), 0.6), base);
  CHECK(std::abs(out.amplitudes.norm() - 1.0) < 1e-12);
}

TEST_CASE("tangent vectors match finite differences") {
  const AnsatzSpec spec{4, 2};
  const DenseState base = ed::ground_state_ed(open_chain(4, 0.3));
  const int np = parameter_count(spec);
  const Eigen::VectorXd theta = wiggle(np, 0.4);
  const Eigen::MatrixXcd tangents = tangent_vectors(spec, theta, base);
  const double h = 1e-5;
  double worst = 0.0;
  for (int k = 0; k < np; ++k) {
    Eigen::VectorXd tp = theta, tm = theta;
    tp(k) += h;
    tm(k) -= h;
    const Eigen::VectorXcd diff =
        (ansatz_state(spec, tp, base).amplitudes - ansatz_state(spec, tm, base).amplitudes) /
        (2.0 * h);
    worst = std::max(worst, (tangents.col(k) - diff).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("mclachlan gradient matches the energy derivative") {
  const AnsatzSpec spec{4, 1};
  const ModelSpec model = open_chain(4, 0.0);
  const DenseState base = ed::ground_state_ed(model);
  const Eigen::VectorXd hm = measurement_generator_diag(staggered(0.6), 4);
  const int np = parameter_count(spec);
  const Eigen::VectorXd theta = wiggle(np, 0.3);
  const McLachlanSystem sys = mclachlan_system(spec, theta, base, hm);

  // <psi|H_m|psi> has gradient -2C
  const auto energy = [&](const Eigen::VectorXd& th) {
    const Eigen::VectorXcd psi = ansatz_state(spec, th, base).amplitudes;
    return psi.dot(hm.cast<cxd>().cwiseProduct(psi)).real();
  };
  const double h = 1e-7;
  double worst = 0.0;
  for (int k = 0; k < np; ++k) {
    Eigen::VectorXd tp = theta, tm = theta;
    tp(k) += h;
    tm(k) -= h;
    const double grad = (energy(tp) - energy(tm)) / (2.0 * h);
    worst = std::max(worst, std::abs(grad + 2.0 * sys.c(k)));
  }
  CHECK(worst < 1e-7);

  // A is the real part of a Gram matrix: symmetric positive semidefinite
  CHECK((sys.a - sys.a.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sys.a, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues()(0) > -1e-10);
}

TEST_CASE("stalled gradient without the seed trick") {
  const AnsatzSpec spec{6, 6};
  const DenseState base = ed::ground_state_ed(open_chain(6, 0.0));
  const Eigen::VectorXd hm = measurement_generator_diag(staggered(0.4), 6);
  const McLachlanSystem stalled =
      mclachlan_system(spec, initial_theta(spec, false), base, hm);
  CHECK(stalled.c.lpNorm<Eigen::Infinity>() < 1e-10);
  const McLachlanSystem kicked = mclachlan_system(spec, initial_theta(spec, true), base, hm);
  CHECK(kicked.c.lpNorm<Eigen::Infinity>() > 1e-3);
}

TEST_CASE("unregularized solve reports singular systems") {
  const AnsatzSpec spec{4, 2}; // 43 parameters in a 16-dim space
  const ModelSpec model = open_chain(4, 0.0);
  const DenseState base = ed::ground_state_ed(model);
  const Eigen::VectorXd hm = measurement_generator_diag(staggered(0.5), 4);
  VqaRunConfig config;
  config.step_size = 0.01;
  config.regularization = 0.0;
  CHECK_THROWS_AS(
      mclachlan_step(spec, initial_theta(spec, true), base, hm, config), std::runtime_error);
  config.regularization = 1e-6;
  CHECK_NOTHROW(mclachlan_step(spec, initial_theta(spec, true), base, hm, config));
}

TEST_CASE("euler and rk4 differ at second order in the step") {
  const AnsatzSpec spec{4, 2};
  const DenseState base = ed::ground_state_ed(open_chain(4, 0.0));
  const Eigen::VectorXd hm = measurement_generator_diag(staggered(0.5), 4);
  const Eigen::VectorXd theta = initial_theta(spec, true);
  const auto gap_at = [&](double dt) {
    VqaRunConfig config;
    config.step_size = dt;
    config.regularization = 1e-4;
    config.integrator = Integrator::euler;
    const Eigen::VectorXd te = mclachlan_step(spec, theta, base, hm, config);
    config.integrator = Integrator::rk4;
    const Eigen::VectorXd tr = mclachlan_step(spec, theta, base, hm, config);
    CHECK((te - theta).norm() > 0.0);
    return (te - tr).norm();
  };
  const double coarse = gap_at(1e-4);
  const double fine = gap_at(5e-5);
  CHECK(coarse < 1e-3);
  // halving the step shrinks the integrator gap by about 2^2
  CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("generator diagonals") {
  const Eigen::VectorXd hm = measurement_generator_diag(staggered(0.7), 2);
  CHECK(hm(0) == 0.0);
  CHECK(hm(1) == -1.0); // site 0 occupied, weight e^{+tau}
  CHECK(hm(2) == 1.0);
  CHECK(hm(3) == 0.0);

  MeasurementSpec pat;
  pat.kind = MeasurementKind::density_pattern;
  pat.pattern = {0.3, 0.7};
  const Eigen::VectorXd hp = measurement_generator_diag(pat, 2);
  CHECK(hp(3) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(hp(1) == doctest::Approx(0.3).epsilon(1e-15));

  MeasurementSpec bond;
  bond.kind = MeasurementKind::bond_xx;
  bond.strength = 0.5;
  CHECK_THROWS_AS(measurement_generator_diag(bond, 2), std::invalid_argument);
}

TEST_CASE("short variational evolution tracks the exact measurement") {
  const ModelSpec model = open_chain(4, 0.0);
  const AnsatzSpec spec{4, 4};
  VqaRunConfig config;
  config.total_tau = 0.4;
  config.step_size = 0.02;
  config.regularization = 1e-4;
  config.integrator = Integrator::rk4;
  const VqaResult result = run_vqa(model, staggered(0.4), spec, config);
  REQUIRE(result.trajectory.size() == 20);
  CHECK(result.trajectory.back().tau == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(result.trajectory.back().fidelity > 0.99);
  CHECK(std::abs(result.state.amplitudes.norm() - 1.0) < 1e-9);
  for (const TrajectoryPoint& p : result.trajectory) {
    CHECK(p.min_eig_a > -1e-9);
    CHECK(p.norm_c >= 0.0);
  }

  // halving the step cannot lose fidelity beyond rounding
  VqaRunConfig fine = config;
  fine.step_size = 0.01;
  const VqaResult finer = run_vqa(model, staggered(0.4), spec, fine);
  CHECK(finer.trajectory.back().fidelity >= result.trajectory.back().fidelity - 1e-6);
}

TEST_CASE("run configuration validation") {
  const ModelSpec model = open_chain(4, 0.0);
  const AnsatzSpec spec{4, 2};
  VqaRunConfig config;
  config.total_tau = 0.5;
  config.step_size = 0.02;
  // horizon does not match the staggered strength
  CHECK_THROWS_AS(run_vqa(model, staggered(0.4), spec, config), std::invalid_argument);
  // horizon not a multiple of the step
  config.total_tau = 0.41;
  CHECK_THROWS_AS(run_vqa(model, staggered(0.41), spec, config), std::invalid_argument);
  // ansatz width mismatch
  config.total_tau = 0.4;
  CHECK_THROWS_AS(run_vqa(open_chain(6, 0.0), staggered(0.4), spec, config),
                  std::invalid_argument);
  MeasurementSpec bond;
  bond.kind = MeasurementKind::bond_xx_yy_paired;
  bond.strength = 0.4;
  CHECK_THROWS_AS(run_vqa(model, bond, spec, config), std::invalid_argument);
}

TEST_CASE("trajectory csv format") {
  std::vector<TrajectoryPoint> traj;
  traj.push_back({0, 0.02, 0.125, 1e-5, 0.75});
  traj.push_back({1, 0.04, 0.25, 2e-5, std::nan("")});
  std::ostringstream out;
  write_trajectory_csv(traj, out);
  const std::string text = out.str();
  CHECK(text.find("step,tau,norm_C,min_eig_A,fidelity_or_nan\n") == 0);
  CHECK(text.find("0,0.02,0.125,1e-05,0.75\n") != std::string::npos);
  CHECK(text.find("nan") != std::string::npos);
}

TEST_SUITE_END();
