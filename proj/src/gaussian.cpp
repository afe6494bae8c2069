#include "mipt/gaussian.hpp"

#include <cmath>
#include <stdexcept>

namespace mipt::gaussian {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using cxd = std::complex<double>;

MatrixXcd expm_hermitian(const MatrixXcd& h, double scale = 1.0) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigensolver failed on measurement generator");
  const VectorXd ew = (scale * es.eigenvalues().array()).exp();
  return es.eigenvectors() * ew.asDiagonal() * es.eigenvectors().adjoint();
}

MatrixXcd thin_q(const MatrixXcd& m) {
  Eigen::HouseholderQR<MatrixXcd> qr(m);
  return qr.householderQ() * MatrixXcd::Identity(m.rows(), m.cols());
}

void check_orthonormal(const MatrixXcd& m, const char* what) {
  const double resid =
      (m.adjoint() * m - MatrixXcd::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
  if (resid > 1e-8)
    throw std::runtime_error(std::string("post-QR orthonormality residual ") +
                             std::to_string(resid) + " in " + what);
}

// single-particle generator h with M = exp(sum_ij h_ij c^dag_i c_j)
MatrixXcd number_conserving_generator(const MeasurementSpec& meas, int n) {
  MatrixXcd h = MatrixXcd::Zero(n, n);
  switch (meas.kind) {
    case MeasurementKind::density_staggered:
      for (int j = 0; j < n; ++j) h(j, j) = (j % 2 == 0 ? meas.strength : -meas.strength);
      break;
    case MeasurementKind::density_pattern: {
      const int period = static_cast<int>(meas.pattern.size());
      for (int j = 0; j < n; ++j) h(j, j) = -meas.pattern[j % period];
      break;
    }
    case MeasurementKind::bond_xx_yy_paired:
      for (int i = 0; i + 1 < n; i += 2) h(i, i + 1) = h(i + 1, i) = meas.strength;
      break;
    case MeasurementKind::bond_xx:
      throw std::invalid_argument("bond_xx is not number conserving");
  }
  return h;
}

MatrixXcd stacked(const BogoliubovState& s) {
  const int n = s.n_sites();
  MatrixXcd xi(2 * n, n);
  xi.topRows(n) = s.u;
  xi.bottomRows(n) = s.v;
  return xi;
}

double binary_entropy_sum(const VectorXd& lam) {
  double s = 0.0;
  for (int i = 0; i < lam.size(); ++i) {
    if (lam(i) < -1e-9 || lam(i) > 1.0 + 1e-9)
      throw std::runtime_error("entanglement spectrum eigenvalue " + std::to_string(lam(i)) +
                               " outside [0,1]: state corrupted");
    const double x = std::min(std::max(lam(i), 1e-14), 1.0 - 1e-14);
    s += -x * std::log(x) - (1.0 - x) * std::log(1.0 - x);
  }
  return s;
}

} // namespace

MatrixXd hopping_matrix(const ModelSpec& model) {
  lattice::validate(model);
  const int n = model.n_sites;
  const double t = model.hopping;
  MatrixXd h = MatrixXd::Zero(n, n);
  for (int j = 0; j + 1 < n; ++j) h(j, j + 1) = h(j + 1, j) = -t;
  if (model.boundary == Boundary::periodic) {
    h(n - 1, 0) += -t;
    h(0, n - 1) += -t;
  }
  return h;
}

SlaterState ground_state_quadratic(const ModelSpec& model) {
  if (model.delta != 0.0)
    throw std::invalid_argument("ground_state_quadratic requires delta = 0");
  const int n = model.n_sites;
  const int np = lattice::particle_count(model);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(hopping_matrix(model));
  if (np < n) {
    const double gap = es.eigenvalues()(np) - es.eigenvalues()(np - 1);
    if (gap <= 1e-12)
      throw std::runtime_error(
          "degenerate Fermi level (gap " + std::to_string(gap) +
          "); use open boundary or n_sites = 2 (mod 4) for periodic half filling");
  }
  return SlaterState{es.eigenvectors().leftCols(np).cast<cxd>()};
}

double ground_energy_quadratic(const ModelSpec& model) {
  const int np = lattice::particle_count(model);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(hopping_matrix(model));
  return es.eigenvalues().head(np).sum();
}

BogoliubovState to_bogoliubov(const SlaterState& state) {
  const int n = state.n_sites();
  const int np = state.n_particles();
  Eigen::HouseholderQR<MatrixXcd> qr(state.orbitals);
  const MatrixXcd q = qr.householderQ() * MatrixXcd::Identity(n, n);
  BogoliubovState out;
  out.u = MatrixXcd::Zero(n, n);
  out.v = MatrixXcd::Zero(n, n);
  out.v.leftCols(np) = state.orbitals;
  out.u.rightCols(n - np) = q.rightCols(n - np).conjugate();
  out.fermion_parity = (np % 2 == 0) ? 1 : -1;
  return out;
}

SlaterState apply_measurement(const SlaterState& state, const MeasurementSpec& meas) {
  const int n = state.n_sites();
  lattice::validate(meas, n);
  if (meas.kind == MeasurementKind::bond_xx)
    throw std::invalid_argument(
        "bond_xx needs the Bogoliubov representation; use the GaussianState overload");
  const MatrixXcd eh = expm_hermitian(number_conserving_generator(meas, n));
  SlaterState out{thin_q(eh * state.orbitals)};
  check_orthonormal(out.orbitals, "apply_measurement (Slater)");
  return out;
}

BogoliubovState apply_measurement(const BogoliubovState& state, const MeasurementSpec& meas,
                                  Boundary boundary) {
  const int n = state.n_sites();
  lattice::validate(meas, n);
  MatrixXcd a(n, n), b = MatrixXcd::Zero(n, n);
  if (meas.kind == MeasurementKind::bond_xx) {
    a = MatrixXcd::Zero(n, n);
    const double w2 = meas.strength / 2.0;
    std::vector<std::pair<std::pair<int, int>, double>> bonds;
    for (int j = 0; j + 1 < n; ++j) bonds.push_back({{j, j + 1}, 1.0});
    if (boundary == Boundary::periodic)
      bonds.push_back({{n - 1, 0}, -static_cast<double>(state.fermion_parity)});
    for (const auto& [ij, f] : bonds) {
      const auto [i, j] = ij;
      a(i, j) += f * w2;
      a(j, i) += f * w2;
      b(i, j) += f * w2;
      b(j, i) -= f * w2;
    }
  } else {
    a = number_conserving_generator(meas, n);
  }
  MatrixXcd hn(2 * n, 2 * n);
  hn.topLeftCorner(n, n) = a;
  hn.topRightCorner(n, n) = b;
  hn.bottomLeftCorner(n, n) = -b.conjugate();
  hn.bottomRightCorner(n, n) = -a.conjugate();
  const MatrixXcd eh = expm_hermitian(hn, -1.0);   // e^{-H_N}
  const MatrixXcd xi = thin_q(eh.conjugate() * stacked(state)); // e^{-H_N^T} [u; v]
  check_orthonormal(xi, "apply_measurement (Bogoliubov)");
  BogoliubovState out;
  out.u = xi.topRows(n);
  out.v = xi.bottomRows(n);
  out.fermion_parity = state.fermion_parity;
  return out;
}

GaussianState apply_measurement(const GaussianState& state, const MeasurementSpec& meas,
                                Boundary boundary) {
  if (std::holds_alternative<SlaterState>(state)) {
    const auto& s = std::get<SlaterState>(state);
    if (meas.kind == MeasurementKind::bond_xx)
      return apply_measurement(to_bogoliubov(s), meas, boundary);
    return apply_measurement(s, meas);
  }
  return apply_measurement(std::get<BogoliubovState>(state), meas, boundary);
}

MatrixXcd correlation_matrix(const SlaterState& state) {
  return state.orbitals * state.orbitals.adjoint();
}

MatrixXcd normal_correlation(const BogoliubovState& state) {
  return (state.v * state.v.adjoint()).conjugate();
}

MatrixXcd anomalous_correlation(const BogoliubovState& state) {
  return (state.u * state.v.adjoint()).conjugate();
}

double entanglement_entropy(const SlaterState& state, const Region& region) {
  validate(region, state.n_sites());
  if (region.empty()) return 0.0;
  const MatrixXcd c = correlation_matrix(state);
  const int m = region.size();
  MatrixXcd sub(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) sub(i, j) = c(region.sites[i], region.sites[j]);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(sub, Eigen::EigenvaluesOnly);
  return binary_entropy_sum(es.eigenvalues());
}

double entanglement_entropy(const BogoliubovState& state, const Region& region) {
  const int n = state.n_sites();
  validate(region, n);
  if (region.empty()) return 0.0;
  const MatrixXcd xi = stacked(state);
  const int m = region.size();
  MatrixXcd rows(2 * m, n);
  for (int i = 0; i < m; ++i) {
    rows.row(i) = xi.row(region.sites[i]);
    rows.row(m + i) = xi.row(n + region.sites[i]);
  }
  // restricted projector; eigenvalues pair as {nu, 1-nu}, each pair one
  // binary entropy, so -sum nu ln nu over all 2m eigenvalues
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rows * rows.adjoint(), Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (int i = 0; i < 2 * m; ++i) {
    const double nu = es.eigenvalues()(i);
    if (nu < -1e-9 || nu > 1.0 + 1e-9)
      throw std::runtime_error("Nambu occupation " + std::to_string(nu) +
                               " outside [0,1]: state corrupted");
    const double x = std::min(std::max(nu, 1e-14), 1.0 - 1e-14);
    s += -x * std::log(x);
  }
  return s;
}

double entanglement_entropy(const GaussianState& state, const Region& region) {
  return std::visit([&](const auto& s) { return entanglement_entropy(s, region); }, state);
}

double mutual_information(const GaussianState& state, const Region& a, const Region& b) {
  if (!regions_disjoint(a, b))
    throw std::invalid_argument("mutual_information regions overlap");
  return entanglement_entropy(state, a) + entanglement_entropy(state, b) -
         entanglement_entropy(state, region_union(a, b));
}

} // namespace mipt::gaussian
