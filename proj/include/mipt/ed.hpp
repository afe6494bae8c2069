#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mipt/lattice.hpp"
#include "mipt/region.hpp"

// Exact-diagonalization engine for the interacting chain (any delta)
// and authoritative small-system oracle for the Gaussian and VQA
// engines. States live in the full 2^L Fock space (the sigma^x sigma^x
// measurement breaks particle-number conservation); the Hamiltonian is
// assembled in the fixed-N sector where the ground state lives.

namespace mipt::ed {

using lattice::Boundary;
using lattice::MeasurementKind;
using lattice::MeasurementSpec;
using lattice::ModelSpec;
using mipt::Region;

struct DenseState {
  Eigen::VectorXcd amplitudes; // length 2^n_sites, norm 1
  int n_sites = 0;
};

struct SectorBasis {
  int n_sites = 0;
  int n_particles = 0;
  std::vector<std::uint32_t> states; // sorted bit-masks with fixed popcount
};

SectorBasis sector_basis(int n_sites, int n_particles);

// sparse symmetric sector Hamiltonian, compressed rows
struct SectorMatrix {
  SectorBasis basis;
  std::vector<std::int64_t> row_ptr;
  std::vector<std::int32_t> cols;
  std::vector<double> vals;

  int dim() const { return static_cast<int>(basis.states.size()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd dense() const;
};

// -t sum (c^dag c + h.c.) + V sum (n - 1/2)(n - 1/2) in the
// half-filling (or requested filling) sector; n_sites <= 24
SectorMatrix build_hamiltonian(const ModelSpec& model);

// full 2^L x 2^L matrix of the same Hamiltonian; n_sites <= 12
Eigen::MatrixXd build_hamiltonian_full(const ModelSpec& model);

struct GroundSolve {
  DenseState state;
  double energy;
  double gap; // to the first excited energy in the sector
};

// dense eigensolve for small sectors, two-pass deflated Lanczos above;
// throws when the sector gap is below 1e-10
GroundSolve solve_ground(const ModelSpec& model);
DenseState ground_state_ed(const ModelSpec& model);

DenseState apply_measurement_ed(const DenseState& state, const MeasurementSpec& meas,
                                Boundary boundary = Boundary::open);

// fermionic mode entanglement entropy of the region (matches the
// Gaussian engine's convention for every site subset, including
// disconnected ones)
double ee_ed(const DenseState& state, const Region& region);

// diagonal of sum_j (-1)^j n_j over basis masks (site 0 counts +1)
Eigen::VectorXd staggered_density_diag(int n_sites);

DenseState imaginary_time_reference(const DenseState& state,
                                    const Eigen::VectorXd& diag_generator, double tau);
DenseState imaginary_time_reference(const DenseState& state,
                                    const Eigen::MatrixXcd& generator, double tau);

namespace detail {
struct LanczosResult {
  double eigenvalue;
  Eigen::VectorXd vector;
  int iterations;
};
// lowest eigenpair; deterministic start vector chosen by seed; optional
// deflation against a previously found vector
LanczosResult lanczos_lowest(const SectorMatrix& h, int seed,
                             const Eigen::VectorXd* deflate = nullptr);
} // namespace detail

} // namespace mipt::ed
