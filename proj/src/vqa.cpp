#include "mipt/vqa.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mipt::vqa {
namespace {

using cxd = std::complex<double>;

enum class GateKind { xx, yy, zz, x, y, z };

struct Gate {
  GateKind kind;
  int i = 0; // site (singles) or lower bond site
  int j = 0;
  bool half = false; // exp(i theta G / 2)
};

std::vector<Gate> build_circuit(const AnsatzSpec& spec) {
  const int n = spec.n_qubits;
  std::vector<Gate> gates;
  gates.push_back({GateKind::z, 0, 0, true}); // seed
  for (int layer = 0; layer < spec.n_layers; ++layer) {
    for (int parity = 0; parity < 2; ++parity) {
      for (GateKind kind : {GateKind::xx, GateKind::yy, GateKind::zz}) {
        for (int i = parity; i + 1 < n; i += 2) {
          gates.push_back({kind, i, i + 1, false});
        }
      }
    }
    for (GateKind kind : {GateKind::x, GateKind::y, GateKind::z}) {
      for (int j = 0; j < n; ++j) {
        gates.push_back({kind, j, j, true});
      }
    }
  }
  return gates;
}

void check_ansatz(const AnsatzSpec& spec) {
  if (spec.n_qubits < 2 || spec.n_qubits > 14) {
    throw std::invalid_argument("ansatz n_qubits must be in [2, 14]");
  }
  if (spec.n_layers < 1) {
    throw std::invalid_argument("ansatz n_layers must be positive");
  }
}

// in-place exp(i theta G) on one state-vector column
void apply_gate(cxd* p, std::int64_t dim, const Gate& g, double theta) {
  const double th = g.half ? 0.5 * theta : theta;
  const double c = std::cos(th);
  const double s = std::sin(th);
  const std::int64_t fi = std::int64_t{1} << g.i;
  const std::int64_t fj = std::int64_t{1} << g.j;
  switch (g.kind) {
    case GateKind::xx: {
      const std::int64_t f = fi | fj;
      const cxd is(0.0, s);
      for (std::int64_t m = 0; m < dim; ++m) {
        if (m & fi) continue;
        const std::int64_t q = m ^ f;
        const cxd a = p[m];
        const cxd b = p[q];
        p[m] = c * a + is * b;
        p[q] = c * b + is * a;
      }
      break;
    }
    case GateKind::yy: {
      const std::int64_t f = fi | fj;
      for (std::int64_t m = 0; m < dim; ++m) {
        if (m & fi) continue;
        const std::int64_t q = m ^ f;
        const double sign = (m & fj) ? s : -s; // shared phase 2 n_j(m) - 1
        const cxd isq(0.0, sign);
        const cxd a = p[m];
        const cxd b = p[q];
        p[m] = c * a + isq * b;
        p[q] = c * b + isq * a;
      }
      break;
    }
    case GateKind::zz: {
      const cxd eq(c, s);
      const cxd ne(c, -s);
      for (std::int64_t m = 0; m < dim; ++m) {
        const bool same = ((m & fi) != 0) == ((m & fj) != 0);
        p[m] *= same ? eq : ne;
      }
      break;
    }
    case GateKind::x: {
      const cxd is(0.0, s);
      for (std::int64_t m = 0; m < dim; ++m) {
        if (m & fj) continue;
        const std::int64_t q = m ^ fj;
        const cxd a = p[m];
        const cxd b = p[q];
        p[m] = c * a + is * b;
        p[q] = c * b + is * a;
      }
      break;
    }
    case GateKind::y: {
      for (std::int64_t m = 0; m < dim; ++m) {
        if (m & fj) continue;
        const std::int64_t q = m ^ fj;
        const cxd a = p[m];
        const cxd b = p[q];
        p[m] = c * a + s * b;
        p[q] = c * b - s * a;
      }
      break;
    }
    case GateKind::z: {
      const cxd up(c, s);
      const cxd dn(c, -s);
      for (std::int64_t m = 0; m < dim; ++m) {
        p[m] *= (m & fj) ? up : dn;
      }
      break;
    }
  }
}

// t = i G psi (times 1/2 for half-angle gates)
void set_tangent_column(const cxd* psi, cxd* t, std::int64_t dim, const Gate& g) {
  const double w = g.half ? 0.5 : 1.0;
  const cxd iw(0.0, w);
  const std::int64_t fi = std::int64_t{1} << g.i;
  const std::int64_t fj = std::int64_t{1} << g.j;
  switch (g.kind) {
    case GateKind::xx: {
      const std::int64_t f = fi | fj;
      for (std::int64_t m = 0; m < dim; ++m) t[m] = iw * psi[m ^ f];
      break;
    }
    case GateKind::yy: {
      const std::int64_t f = fi | fj;
      for (std::int64_t m = 0; m < dim; ++m) {
        const bool same = ((m & fi) != 0) == ((m & fj) != 0);
        t[m] = (same ? -iw : iw) * psi[m ^ f];
      }
      break;
    }
    case GateKind::zz: {
      for (std::int64_t m = 0; m < dim; ++m) {
        const bool same = ((m & fi) != 0) == ((m & fj) != 0);
        t[m] = (same ? iw : -iw) * psi[m];
      }
      break;
    }
    case GateKind::x: {
      for (std::int64_t m = 0; m < dim; ++m) t[m] = iw * psi[m ^ fj];
      break;
    }
    case GateKind::y: {
      // i * i(2 n_j - 1) collapses to a real weight
      for (std::int64_t m = 0; m < dim; ++m) {
        t[m] = ((m & fj) ? -w : w) * psi[m ^ fj];
      }
      break;
    }
    case GateKind::z: {
      for (std::int64_t m = 0; m < dim; ++m) {
        t[m] = ((m & fj) ? iw : -iw) * psi[m];
      }
      break;
    }
  }
}

Eigen::VectorXcd apply_circuit(const std::vector<Gate>& gates, const Eigen::VectorXd& theta,
                               Eigen::VectorXcd psi) {
  for (std::size_t k = 0; k < gates.size(); ++k) {
    apply_gate(psi.data(), psi.size(), gates[k], theta(static_cast<int>(k)));
  }
  return psi;
}

struct Sweep {
  Eigen::MatrixXcd tangents;
  Eigen::VectorXcd state;
};

// forward sweep: after applying gate k, its tangent column is i G_k
// acting on the partially built state, and earlier columns are pushed
// through gate k
Sweep tangent_sweep(const std::vector<Gate>& gates, const Eigen::VectorXd& theta,
                    const Eigen::VectorXcd& base) {
  const std::int64_t dim = base.size();
  const int np = static_cast<int>(gates.size());
  Sweep sw{Eigen::MatrixXcd(dim, np), base};
  for (int k = 0; k < np; ++k) {
    const Gate& g = gates[k];
    for (int col = 0; col < k; ++col) {
      apply_gate(sw.tangents.col(col).data(), dim, g, theta(k));
    }
    apply_gate(sw.state.data(), dim, g, theta(k));
    set_tangent_column(sw.state.data(), sw.tangents.col(k).data(), dim, g);
  }
  return sw;
}

void check_state(const AnsatzSpec& spec, const Eigen::VectorXd& theta, const DenseState& base) {
  check_ansatz(spec);
  if (base.n_sites != spec.n_qubits) {
    throw std::invalid_argument("base state size does not match the ansatz");
  }
  if (base.amplitudes.size() != (std::int64_t{1} << spec.n_qubits)) {
    throw std::invalid_argument("base state has wrong dimension");
  }
  if (theta.size() != parameter_count(spec)) {
    throw std::invalid_argument("parameter vector has wrong length");
  }
}

McLachlanSystem system_from_sweep(const Sweep& sw, const Eigen::VectorXd& hm_diag) {
  McLachlanSystem sys;
  sys.a = (sw.tangents.adjoint() * sw.tangents).real();
  const Eigen::VectorXcd hpsi = sw.state.cwiseProduct(hm_diag.cast<cxd>());
  sys.c = -(sw.tangents.adjoint() * hpsi).real();
  sys.state = sw.state;
  return sys;
}

Eigen::VectorXd solve_rate(const Eigen::MatrixXd& a, const Eigen::VectorXd& c, double eps) {
  if (eps < 0.0) throw std::invalid_argument("regularization must be nonnegative");
  if (eps == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0);
    if (lo < 1e-12) {
      throw std::runtime_error("McLachlan matrix is singular (smallest eigenvalue " +
                               std::to_string(lo) + "); use a nonzero regularization");
    }
    return a.ldlt().solve(c);
  }
  Eigen::MatrixXd m = a;
  m.diagonal().array() += eps;
  return m.ldlt().solve(c);
}

} // namespace

int parameter_count(const AnsatzSpec& spec) {
  check_ansatz(spec);
  const int n = spec.n_qubits;
  const int bonds = (n / 2) + ((n - 1) / 2);
  return spec.n_layers * (3 * bonds + 3 * n) + 1;
}

Eigen::VectorXd initial_theta(const AnsatzSpec& spec, bool seed_trick) {
  const int np = parameter_count(spec);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(np);
  if (seed_trick) {
    const int n = spec.n_qubits;
    const int bonds = (n / 2) + ((n - 1) / 2);
    const int idx = 1 + 3 * bonds + 2 * n; // first layer's z rotation on site 0
    const std::vector<Gate> gates = build_circuit(spec);
    if (gates.at(idx).kind != GateKind::z || gates.at(idx).i != 0) {
      throw std::logic_error("circuit layout changed under the seed trick");
    }
    theta(0) = 0.5;
    theta(idx) = -0.5;
  }
  return theta;
}

DenseState ansatz_state(const AnsatzSpec& spec, const Eigen::VectorXd& theta,
                        const DenseState& base) {
  check_state(spec, theta, base);
  return {apply_circuit(build_circuit(spec), theta, base.amplitudes), spec.n_qubits};
}

Eigen::MatrixXcd tangent_vectors(const AnsatzSpec& spec, const Eigen::VectorXd& theta,
                                 const DenseState& base) {
  check_state(spec, theta, base);
  return tangent_sweep(build_circuit(spec), theta, base.amplitudes).tangents;
}

McLachlanSystem mclachlan_system(const AnsatzSpec& spec, const Eigen::VectorXd& theta,
                                 const DenseState& base, const Eigen::VectorXd& hm_diag) {
  check_state(spec, theta, base);
  if (hm_diag.size() != base.amplitudes.size()) {
    throw std::invalid_argument("generator diagonal has wrong dimension");
  }
  return system_from_sweep(tangent_sweep(build_circuit(spec), theta, base.amplitudes), hm_diag);
}

Eigen::VectorXd mclachlan_step(const AnsatzSpec& spec, const Eigen::VectorXd& theta,
                               const DenseState& base, const Eigen::VectorXd& hm_diag,
                               const VqaRunConfig& config) {
  check_state(spec, theta, base);
  if (hm_diag.size() != base.amplitudes.size()) {
    throw std::invalid_argument("generator diagonal has wrong dimension");
  }
  if (!(config.step_size > 0.0)) throw std::invalid_argument("step_size must be positive");
  const std::vector<Gate> gates = build_circuit(spec);
  const auto rate = [&](const Eigen::VectorXd& th) {
    const Sweep sw = tangent_sweep(gates, th, base.amplitudes);
    const McLachlanSystem sys = system_from_sweep(sw, hm_diag);
    return solve_rate(sys.a, sys.c, config.regularization);
  };
  const double dt = config.step_size;
  if (config.integrator == Integrator::euler) {
    return theta + dt * rate(theta);
  }
  const Eigen::VectorXd k1 = rate(theta);
  const Eigen::VectorXd k2 = rate(theta + 0.5 * dt * k1);
  const Eigen::VectorXd k3 = rate(theta + 0.5 * dt * k2);
  const Eigen::VectorXd k4 = rate(theta + dt * k3);
  return theta + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Eigen::VectorXd measurement_generator_diag(const MeasurementSpec& meas, int n_qubits) {
  lattice::validate(meas, n_qubits);
  const std::int64_t dim = std::int64_t{1} << n_qubits;
  Eigen::VectorXd hm(dim);
  if (meas.kind == MeasurementKind::density_staggered) {
    for (std::int64_t m = 0; m < dim; ++m) {
      double s = 0.0;
      for (int j = 0; j < n_qubits; ++j) {
        if (m >> j & 1) s += (j % 2 == 0) ? -1.0 : 1.0;
      }
      hm(m) = s;
    }
  } else if (meas.kind == MeasurementKind::density_pattern) {
    const int period = static_cast<int>(meas.pattern.size());
    for (std::int64_t m = 0; m < dim; ++m) {
      double s = 0.0;
      for (int j = 0; j < n_qubits; ++j) {
        if (m >> j & 1) s += meas.pattern[j % period];
      }
      hm(m) = s;
    }
  } else {
    throw std::invalid_argument(
        "variational evolution requires a density (diagonal) measurement kind");
  }
  return hm;
}

VqaResult run_vqa(const ModelSpec& model, const MeasurementSpec& meas, const AnsatzSpec& spec,
                  const VqaRunConfig& config) {
  lattice::validate(model);
  check_ansatz(spec);
  if (spec.n_qubits != model.n_sites) {
    throw std::invalid_argument("ansatz width must match the chain length");
  }
  if (!(config.step_size > 0.0)) throw std::invalid_argument("step_size must be positive");
  const Eigen::VectorXd hm = measurement_generator_diag(meas, model.n_sites);
  const double expected_tau =
      meas.kind == MeasurementKind::density_staggered ? meas.strength : 1.0;
  if (std::abs(config.total_tau - expected_tau) > 1e-12) {
    throw std::invalid_argument(
        "total_tau must match the measurement (strength for the staggered kind, 1 for an "
        "explicit pattern)");
  }
  const int nsteps = static_cast<int>(std::lround(config.total_tau / config.step_size));
  if (std::abs(nsteps * config.step_size - config.total_tau) > 1e-9) {
    throw std::invalid_argument("total_tau must be an integer multiple of step_size");
  }

  const DenseState base = ed::ground_state_ed(model);
  const std::vector<Gate> gates = build_circuit(spec);
  Eigen::VectorXd theta = initial_theta(spec, config.seed_trick);

  const auto rate = [&](const Eigen::VectorXd& th) {
    const Sweep sw = tangent_sweep(gates, th, base.amplitudes);
    const McLachlanSystem sys = system_from_sweep(sw, hm);
    return solve_rate(sys.a, sys.c, config.regularization);
  };

  VqaResult result;
  result.trajectory.reserve(nsteps);
  const double dt = config.step_size;
  double tau = 0.0;
  for (int step = 0; step < nsteps; ++step) {
    const Sweep sw = tangent_sweep(gates, theta, base.amplitudes);
    const McLachlanSystem sys = system_from_sweep(sw, hm);
    const Eigen::VectorXd k1 = solve_rate(sys.a, sys.c, config.regularization);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sys.a, Eigen::EigenvaluesOnly);

    if (config.integrator == Integrator::euler) {
      theta += dt * k1;
    } else {
      const Eigen::VectorXd k2 = rate(theta + 0.5 * dt * k1);
      const Eigen::VectorXd k3 = rate(theta + 0.5 * dt * k2);
      const Eigen::VectorXd k4 = rate(theta + dt * k3);
      theta += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    tau += dt;

    double fid = std::numeric_limits<double>::quiet_NaN();
    if (config.track_fidelity) {
      const Eigen::VectorXcd psi = apply_circuit(gates, theta, base.amplitudes);
      Eigen::VectorXcd target =
          base.amplitudes.cwiseProduct((-tau * hm.array()).exp().matrix().cast<cxd>());
      const double nv = psi.squaredNorm();
      const double nt = target.squaredNorm();
      fid = std::norm(psi.dot(target)) / (nv * nt);
    }
    result.trajectory.push_back(
        {step, tau, sys.c.lpNorm<Eigen::Infinity>(), es.eigenvalues()(0), fid});
  }

  result.state = {apply_circuit(gates, theta, base.amplitudes), model.n_sites};
  result.theta = std::move(theta);
  return result;
}

void write_trajectory_csv(const std::vector<TrajectoryPoint>& trajectory, std::ostream& out) {
  out << "step,tau,norm_C,min_eig_A,fidelity_or_nan\n";
  char buf[160];
  for (const TrajectoryPoint& p : trajectory) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g", p.step, p.tau, p.norm_c,
                  p.min_eig_a, p.fidelity);
    out << buf << '\n';
  }
}

} // namespace mipt::vqa
