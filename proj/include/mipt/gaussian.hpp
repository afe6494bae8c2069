#pragma once

#include <Eigen/Dense>
#include <variant>

#include "mipt/lattice.hpp"
#include "mipt/region.hpp"

// Fermionic Gaussian-state engine: exact ground states of the free
// chain, non-unitary quadratic evolution implementing the measurement
// operators, and entanglement entropy / mutual information from
// restricted correlation matrices.
//
// Number-conserving measurement kinds act on a Slater determinant
// directly; the sigma^x sigma^x bond kind contains pairing terms and
// promotes to the Bogoliubov representation.

namespace mipt::gaussian {

using lattice::Boundary;
using lattice::MeasurementKind;
using lattice::MeasurementSpec;
using lattice::ModelSpec;
using mipt::Region;

struct SlaterState {
  Eigen::MatrixXcd orbitals; // L x N, orthonormal columns

  int n_sites() const { return static_cast<int>(orbitals.rows()); }
  int n_particles() const { return static_cast<int>(orbitals.cols()); }
};

struct BogoliubovState {
  // stacked (2L x L) quasiparticle amplitude matrix [u; v], orthonormal columns
  Eigen::MatrixXcd u;
  Eigen::MatrixXcd v;
  int fermion_parity = 1; // (-1)^N of the underlying state; set at promotion

  int n_sites() const { return static_cast<int>(u.rows()); }
};

using GaussianState = std::variant<SlaterState, BogoliubovState>;

// single-particle hopping matrix of the delta = 0 chain
Eigen::MatrixXd hopping_matrix(const ModelSpec& model);

// Slater determinant filling the N lowest modes; throws on a
// degenerate Fermi level (gap at the filling cut <= 1e-12)
SlaterState ground_state_quadratic(const ModelSpec& model);

double ground_energy_quadratic(const ModelSpec& model);

BogoliubovState to_bogoliubov(const SlaterState& state);

// |psi> -> M |psi| / ||M psi|| within the Gaussian family.
// The Slater overload handles the number-conserving kinds and rejects
// bond_xx; boundary matters only for bond_xx (wrap bond).
SlaterState apply_measurement(const SlaterState& state, const MeasurementSpec& meas);
BogoliubovState apply_measurement(const BogoliubovState& state, const MeasurementSpec& meas,
                                  Boundary boundary = Boundary::open);
GaussianState apply_measurement(const GaussianState& state, const MeasurementSpec& meas,
                                Boundary boundary = Boundary::open);

Eigen::MatrixXcd correlation_matrix(const SlaterState& state);      // U U^dag
Eigen::MatrixXcd normal_correlation(const BogoliubovState& state);  // <c^dag c>
Eigen::MatrixXcd anomalous_correlation(const BogoliubovState& state); // <c c>

double entanglement_entropy(const SlaterState& state, const Region& region);
double entanglement_entropy(const BogoliubovState& state, const Region& region);
double entanglement_entropy(const GaussianState& state, const Region& region);

double mutual_information(const GaussianState& state, const Region& a, const Region& b);

} // namespace mipt::gaussian
