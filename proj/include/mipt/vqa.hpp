#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "mipt/ed.hpp"

// Variational imaginary-time evolution (McLachlan principle) over a
// layered hardware-efficient circuit acting on the exact chain ground
// state. Circuit layout per layer: xx, yy, zz two-qubit rotations on
// bonds (0,1),(2,3),... then (1,2),(3,4),..., followed by x, y, z
// single-qubit rotations on every site; one parametrized seed rotation
// exp(i theta sz_0 / 2) is prepended to the whole circuit. Open chain.
//
// Conventions: two-qubit gates are exp(i theta G), single-qubit gates
// exp(i theta G / 2). Parameters are in circuit application order,
// seed first.

namespace mipt::vqa {

using ed::DenseState;
using lattice::MeasurementKind;
using lattice::MeasurementSpec;
using lattice::ModelSpec;

struct AnsatzSpec {
  int n_qubits = 2;
  int n_layers = 1;
};

// n_layers * (3 * (bonds_odd + bonds_even) + 3 * n_qubits) + 1
int parameter_count(const AnsatzSpec& spec);

enum class Integrator { euler, rk4 };

struct VqaRunConfig {
  double total_tau = 0.0;       // imaginary time horizon (= W)
  double step_size = 0.01;
  double regularization = 1e-6; // Tikhonov shift on the A matrix
  Integrator integrator = Integrator::rk4;
  bool seed_trick = true;
  bool track_fidelity = true;
};

// all-zero parameters, or the seed-trick initialization: the prepended
// seed at +0.5 cancelled exactly by the first layer's z rotation on
// site 0 at -0.5 (state unchanged, but the stalled C != 0)
Eigen::VectorXd initial_theta(const AnsatzSpec& spec, bool seed_trick = true);

DenseState ansatz_state(const AnsatzSpec& spec, const Eigen::VectorXd& theta,
                        const DenseState& base);

// columns are d|psi>/d theta_a in parameter order
Eigen::MatrixXcd tangent_vectors(const AnsatzSpec& spec, const Eigen::VectorXd& theta,
                                 const DenseState& base);

struct McLachlanSystem {
  Eigen::MatrixXd a;      // Re <d_a psi | d_b psi>
  Eigen::VectorXd c;      // -Re <d_a psi | H_m | psi>
  Eigen::VectorXcd state; // U(theta) |base>
};

McLachlanSystem mclachlan_system(const AnsatzSpec& spec, const Eigen::VectorXd& theta,
                                 const DenseState& base, const Eigen::VectorXd& hm_diag);

// advance theta by one step of the configured integrator
Eigen::VectorXd mclachlan_step(const AnsatzSpec& spec, const Eigen::VectorXd& theta,
                               const DenseState& base, const Eigen::VectorXd& hm_diag,
                               const VqaRunConfig& config);

struct TrajectoryPoint {
  int step;
  double tau;      // after the step
  double norm_c;   // max-norm of C at the step's starting point
  double min_eig_a;
  double fidelity; // vs exp(-tau H_m)|base>, NaN when not tracked
};

struct VqaResult {
  DenseState state;
  Eigen::VectorXd theta;
  std::vector<TrajectoryPoint> trajectory;
};

// diagonal generator H_m with measurement = e^{-tau H_m}; density
// kinds only (staggered: H_m = -sum_j (-1)^j n_j, integrated to
// tau = strength; pattern: H_m = sum_j pattern[j mod p] n_j, tau = 1)
Eigen::VectorXd measurement_generator_diag(const MeasurementSpec& meas, int n_qubits);

VqaResult run_vqa(const ModelSpec& model, const MeasurementSpec& meas, const AnsatzSpec& spec,
                  const VqaRunConfig& config);

// columns: step,tau,norm_C,min_eig_A,fidelity_or_nan
void write_trajectory_csv(const std::vector<TrajectoryPoint>& trajectory, std::ostream& out);

} // namespace mipt::vqa
