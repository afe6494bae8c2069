#pragma once

#include <string>
#include <vector>

// Model / measurement descriptions and the closed-form theory curves:
// Luttinger parameter, entanglement power laws, the effective central
// charge of the measured critical chain, and protocol success
// probabilities. Everything here is a pure function; entropies are in
// nats (natural logs) throughout the project.

namespace mipt::lattice {

enum class Boundary { periodic, open };

struct ModelSpec {
  int n_sites = 2;
  Boundary boundary = Boundary::open;
  double delta = 0.0;   // anisotropy V/t
  double hopping = 1.0; // t, the energy unit
  double filling = 0.5; // particles per site, (0, 1/2]
};

// filling * n_sites, after checking it is an integer
int particle_count(const ModelSpec& model);
void validate(const ModelSpec& model);

enum class MeasurementKind {
  density_staggered, // e^{+W sum_j (-1)^j n_j}, site 0 weighted e^{+W}
  bond_xx_yy_paired, // e^{W sum_i (c^dag_{2i} c_{2i+1} + h.c.)}, disjoint pairs
  bond_xx,           // prod_bonds e^{(W/2) sx_i sx_{i+1}}, wrap bond if periodic
  density_pattern    // e^{- sum_j pattern[j mod p] n_j}
};

std::string to_string(MeasurementKind kind);
MeasurementKind measurement_kind_from_string(const std::string& name);

struct MeasurementSpec {
  MeasurementKind kind = MeasurementKind::density_staggered;
  double strength = 0.0;             // W
  std::vector<double> pattern = {};  // density_pattern only, one period
};

void validate(const MeasurementSpec& meas, int n_sites);

struct ProtocolSpec {
  double filling = 0.5;
  std::vector<double> period_weights = {}; // W_j >= 0 over one period
  int chain_length = 4;
};

void validate(const ProtocolSpec& protocol);

// K = pi / (2 (pi - arccos delta)), |delta| < 1
double luttinger_k(double delta);

// 2/K - 2, the decay power of the subleading entropy term, 0 < K < 1
double power_law_exponent(double k);

// prefactor f(K) = (1/(1-2/K) - 1/(2-2/K)) (pi/sqrt(K) cot(pi/sqrt(K)) - 1);
// throws within 1e-9 of a cot pole (sqrt(K) = 1/m)
double f_of_k(double k);

// Li2 on [-1, 1], absolute accuracy well below 1e-12
double dilog(double z);

// effective central charge at K=1 as a function of measurement
// strength, with s = 1/cosh(2W):
//   c_eff = -(6/pi^2) { [(1+s)ln(1+s) + (1-s)ln(1-s)] ln s
//                       + (1+s) Li2(-s) + (1-s) Li2(s) }
// c_eff(0) = 1 exactly via the s -> 1 limit branch
double c_eff_theory(double w);

struct SuccessProbability {
  double probability;  // P = prod_j p_j, p_j = 1 - (1 - e^{-2 W_j}) n
  double lower_bound;  // (1 - n)^{L_tot}
};

SuccessProbability success_probability(const ProtocolSpec& protocol);

} // namespace mipt::lattice
