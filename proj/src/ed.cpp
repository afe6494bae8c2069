#include "mipt/ed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mipt::ed {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cxd = std::complex<double>;

std::vector<std::pair<int, int>> chain_bonds(int n, Boundary boundary) {
  std::vector<std::pair<int, int>> b;
  for (int j = 0; j + 1 < n; ++j) b.push_back({j, j + 1});
  if (boundary == Boundary::periodic) b.push_back({n - 1, 0});
  return b;
}

// sign of c^dag_i c_j between occupied sites strictly inside (i, j)
double string_sign(std::uint32_t m, int i, int j) {
  const int lo = std::min(i, j), hi = std::max(i, j);
  const std::uint32_t between = ((1u << hi) - 1u) ^ ((1u << (lo + 1)) - 1u);
  return (std::popcount(m & between) & 1) ? -1.0 : 1.0;
}

void check_full_space(const DenseState& state) {
  if (state.n_sites < 1 || state.n_sites > 20)
    throw std::invalid_argument("dense state size guard: 1 <= n_sites <= 20");
  if (state.amplitudes.size() != (1LL << state.n_sites))
    throw std::invalid_argument("amplitude vector length is not 2^n_sites");
}

DenseState normalized(VectorXcd amps, int n) {
  const double nrm = amps.norm();
  if (nrm < 1e-150) throw std::runtime_error("state norm vanished under measurement");
  return DenseState{amps / nrm, n};
}

VectorXd seeded_start(int dim, int seed) {
  VectorXd v(dim);
  const double a = seed + std::sqrt(2.0);
  const double b = std::sqrt(3.0) * (seed + 1.0);
  for (int i = 0; i < dim; ++i)
    v(i) = std::sin((i + 1.0) * a) + 0.5 * std::cos((i + 1.0) * b);
  return v;
}

struct Tridiag {
  double e0;
  VectorXd y0;
};

Tridiag tridiag_ground(const VectorXd& alpha, const VectorXd& beta, int k) {
  MatrixXd t = MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    t(i, i) = alpha(i);
    if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta(i);
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(t);
  return {es.eigenvalues()(0), es.eigenvectors().col(0)};
}

} // namespace

SectorBasis sector_basis(int n_sites, int n_particles) {
  if (n_sites < 1 || n_sites > 24) throw std::invalid_argument("sector basis guard: n_sites <= 24");
  if (n_particles < 0 || n_particles > n_sites)
    throw std::invalid_argument("n_particles out of range");
  SectorBasis basis{n_sites, n_particles, {}};
  if (n_particles == 0) {
    basis.states = {0u};
    return basis;
  }
  // Gosper's hack: ascending masks of fixed popcount
  std::uint32_t v = (1u << n_particles) - 1u;
  const std::uint32_t limit = 1u << n_sites;
  while (v < limit) {
    basis.states.push_back(v);
    const std::uint32_t t = v | (v - 1u);
    v = (t + 1u) | (((~t & (t + 1u)) - 1u) >> (std::countr_zero(v) + 1));
  }
  return basis;
}

VectorXd SectorMatrix::apply(const VectorXd& x) const {
  const int n = dim();
  VectorXd y = VectorXd::Zero(n);
  for (int r = 0; r < n; ++r) {
    double acc = 0.0;
    for (std::int64_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) acc += vals[p] * x(cols[p]);
    y(r) = acc;
  }
  return y;
}

MatrixXd SectorMatrix::dense() const {
  const int n = dim();
  if (n > 4096) throw std::invalid_argument("dense sector matrix guard: dim <= 4096");
  MatrixXd h = MatrixXd::Zero(n, n);
  for (int r = 0; r < n; ++r)
    for (std::int64_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) h(r, cols[p]) += vals[p];
  return h;
}

SectorMatrix build_hamiltonian(const ModelSpec& model) {
  lattice::validate(model);
  const int n = model.n_sites;
  const double t = model.hopping;
  const double v = model.delta * model.hopping;
  SectorMatrix h;
  h.basis = sector_basis(n, lattice::particle_count(model));
  const auto& masks = h.basis.states;
  const auto bonds = chain_bonds(n, model.boundary);
  const int dim = static_cast<int>(masks.size());
  h.row_ptr.assign(dim + 1, 0);
  std::vector<std::pair<std::int32_t, double>> row;
  for (int k = 0; k < dim; ++k) {
    const std::uint32_t m = masks[k];
    row.clear();
    double diag = 0.0;
    for (const auto& [i, j] : bonds) {
      const int ni = (m >> i) & 1u;
      const int nj = (m >> j) & 1u;
      diag += v * (ni - 0.5) * (nj - 0.5);
      if (ni != nj) {
        const std::uint32_t m2 = m ^ (1u << i) ^ (1u << j);
        const auto it = std::lower_bound(masks.begin(), masks.end(), m2);
        row.push_back({static_cast<std::int32_t>(it - masks.begin()), -t * string_sign(m, i, j)});
      }
    }
    row.push_back({static_cast<std::int32_t>(k), diag});
    std::sort(row.begin(), row.end());
    for (std::size_t q = 0; q < row.size(); ++q) {
      if (q > 0 && row[q].first == h.cols.back()) {
        h.vals.back() += row[q].second; // doubled bond (periodic two-site chain)
      } else {
        h.cols.push_back(row[q].first);
        h.vals.push_back(row[q].second);
      }
    }
    h.row_ptr[k + 1] = static_cast<std::int64_t>(h.cols.size());
  }
  return h;
}

Eigen::MatrixXd build_hamiltonian_full(const ModelSpec& model) {
  lattice::validate(model);
  const int n = model.n_sites;
  if (n > 12) throw std::invalid_argument("full-space Hamiltonian guard: n_sites <= 12");
  const double t = model.hopping;
  const double v = model.delta * model.hopping;
  const auto bonds = chain_bonds(n, model.boundary);
  const std::int64_t dim = 1LL << n;
  MatrixXd h = MatrixXd::Zero(dim, dim);
  for (std::int64_t m = 0; m < dim; ++m) {
    double diag = 0.0;
    for (const auto& [i, j] : bonds) {
      const int ni = (m >> i) & 1;
      const int nj = (m >> j) & 1;
      diag += v * (ni - 0.5) * (nj - 0.5);
      if (ni != nj) {
        const std::int64_t m2 = m ^ (1LL << i) ^ (1LL << j);
        h(m2, m) += -t * string_sign(static_cast<std::uint32_t>(m), i, j);
      }
    }
    h(m, m) = diag;
  }
  return h;
}

namespace detail {

LanczosResult lanczos_lowest(const SectorMatrix& h, int seed, const VectorXd* deflate) {
  const int dim = h.dim();
  const int max_iter = std::min(dim, 300);
  MatrixXd basis(dim, max_iter);
  VectorXd alpha(max_iter), beta(max_iter);
  VectorXd v = seeded_start(dim, seed);
  if (deflate) v -= (*deflate) * deflate->dot(v);
  v /= v.norm();
  basis.col(0) = v;
  double prev = std::numeric_limits<double>::quiet_NaN();
  int k = 1;
  for (int j = 0; j < max_iter; ++j) {
    VectorXd w = h.apply(basis.col(j));
    alpha(j) = basis.col(j).dot(w);
    w -= alpha(j) * basis.col(j);
    if (j > 0) w -= beta(j - 1) * basis.col(j - 1);
    for (int pass = 0; pass < 2; ++pass) { // full reorthogonalization
      w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
      if (deflate) w -= (*deflate) * deflate->dot(w);
    }
    const double b = w.norm();
    k = j + 1;
    bool done = b < 1e-14 || j == max_iter - 1;
    if (!done && j >= 1 && j % 5 == 0) {
      const Tridiag tg = tridiag_ground(alpha, beta, k);
      const double resid = b * std::abs(tg.y0(k - 1));
      if (!std::isnan(prev) && std::abs(tg.e0 - prev) < 1e-13 * std::max(1.0, std::abs(tg.e0)) &&
          resid < 1e-9)
        done = true;
      prev = tg.e0;
    }
    if (done) break;
    beta(j) = b;
    basis.col(j + 1) = w / b;
  }
  const Tridiag tg = tridiag_ground(alpha, beta, k);
  VectorXd x = basis.leftCols(k) * tg.y0;
  if (deflate) x -= (*deflate) * deflate->dot(x);
  x /= x.norm();
  return {tg.e0, x, k};
}

} // namespace detail

GroundSolve solve_ground(const ModelSpec& model) {
  lattice::validate(model);
  if (model.n_sites > 20)
    throw std::invalid_argument("ground state embedding guard: n_sites <= 20");
  const SectorMatrix h = build_hamiltonian(model);
  const int dim = h.dim();
  double e0, gap;
  VectorXd g;
  if (dim <= 1024) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(h.dense());
    e0 = es.eigenvalues()(0);
    gap = dim > 1 ? es.eigenvalues()(1) - e0 : std::numeric_limits<double>::infinity();
    g = es.eigenvectors().col(0);
  } else {
    const auto first = detail::lanczos_lowest(h, 0);
    const auto second = detail::lanczos_lowest(h, 1, &first.vector);
    e0 = first.eigenvalue;
    gap = second.eigenvalue - e0;
    g = first.vector;
  }
  if (gap < 1e-10)
    throw std::runtime_error(
        "degenerate ground state (sector gap " + std::to_string(gap) +
        "); periodic half filling needs n_sites = 2 (mod 4)");
  int kmax = 0;
  for (int i = 1; i < dim; ++i)
    if (std::abs(g(i)) > std::abs(g(kmax))) kmax = i;
  if (g(kmax) < 0.0) g = -g; // deterministic global phase
  VectorXcd psi = VectorXcd::Zero(1LL << model.n_sites);
  for (int i = 0; i < dim; ++i) psi(h.basis.states[i]) = g(i);
  return {DenseState{std::move(psi), model.n_sites}, e0, gap};
}

DenseState ground_state_ed(const ModelSpec& model) { return solve_ground(model).state; }

Eigen::VectorXd staggered_density_diag(int n_sites) {
  const std::int64_t dim = 1LL << n_sites;
  std::uint32_t even = 0;
  for (int j = 0; j < n_sites; j += 2) even |= 1u << j;
  const std::uint32_t odd = ((1u << n_sites) - 1u) & ~even;
  VectorXd d(dim);
  for (std::int64_t m = 0; m < dim; ++m)
    d(m) = std::popcount(static_cast<std::uint32_t>(m) & even) -
           std::popcount(static_cast<std::uint32_t>(m) & odd);
  return d;
}

DenseState apply_measurement_ed(const DenseState& state, const MeasurementSpec& meas,
                                Boundary boundary) {
  check_full_space(state);
  const int n = state.n_sites;
  lattice::validate(meas, n);
  const std::int64_t dim = 1LL << n;
  VectorXcd out = state.amplitudes;
  switch (meas.kind) {
    case MeasurementKind::density_staggered: {
      const VectorXd d = staggered_density_diag(n);
      for (std::int64_t m = 0; m < dim; ++m) out(m) *= std::exp(meas.strength * d(m));
      break;
    }
    case MeasurementKind::density_pattern: {
      const int period = static_cast<int>(meas.pattern.size());
      for (std::int64_t m = 0; m < dim; ++m) {
        double s = 0.0;
        std::uint32_t bits = static_cast<std::uint32_t>(m);
        while (bits) {
          const int j = std::countr_zero(bits);
          s -= meas.pattern[j % period];
          bits &= bits - 1u;
        }
        out(m) *= std::exp(s);
      }
      break;
    }
    case MeasurementKind::bond_xx_yy_paired: {
      const double ch = std::cosh(meas.strength);
      const double sh = std::sinh(meas.strength);
      for (int i = 0; i + 1 < n; i += 2) {
        const std::int64_t fi = 1LL << i, fj = 1LL << (i + 1);
        for (std::int64_t m = 0; m < dim; ++m) {
          if ((m & fi) && !(m & fj)) { // |10> member of the pair
            const std::int64_t p = m ^ fi ^ fj;
            const cxd a = out(m), b = out(p);
            out(m) = ch * a + sh * b;
            out(p) = sh * a + ch * b;
          }
        }
      }
      break;
    }
    case MeasurementKind::bond_xx: {
      // each bond gate: cosh(W/2) + sinh(W/2) sx_i sx_j; the JW string
      // cancels the fermionic reordering sign, a plain double bit flip
      const double ch = std::cosh(meas.strength / 2.0);
      const double sh = std::sinh(meas.strength / 2.0);
      for (const auto& [i, j] : chain_bonds(n, boundary)) {
        const std::int64_t fi = 1LL << i, fj = 1LL << j;
        for (std::int64_t m = 0; m < dim; ++m) {
          if (!(m & fi)) {
            const std::int64_t p = m ^ fi ^ fj;
            const cxd a = out(m), b = out(p);
            out(m) = ch * a + sh * b;
            out(p) = sh * a + ch * b;
          }
        }
      }
      break;
    }
  }
  return normalized(std::move(out), n);
}

double ee_ed(const DenseState& state, const Region& region) {
  check_full_space(state);
  const int n = state.n_sites;
  validate(region, n);
  std::vector<int> rest;
  {
    std::size_t q = 0;
    for (int s = 0; s < n; ++s) {
      if (q < region.sites.size() && region.sites[q] == s)
        ++q;
      else
        rest.push_back(s);
    }
  }
  const int na = region.size();
  const int nb = static_cast<int>(rest.size());
  // fermionic mode entanglement: reorder modes so the region comes
  // first, which multiplies each basis state by the parity of crossings
  // between occupied region sites and occupied complement sites below
  // them; for an unbroken (possibly wrapped) block this reduces to the
  // plain qubit trace on fixed-parity states
  std::vector<std::uint32_t> rest_below(na, 0);
  {
    std::uint32_t rest_mask = 0;
    for (int s : rest) rest_mask |= 1u << s;
    for (int t = 0; t < na; ++t)
      rest_below[t] = rest_mask & ((1u << region.sites[t]) - 1u);
  }
  MatrixXcd m = MatrixXcd::Zero(1LL << na, 1LL << nb);
  const std::int64_t dim = 1LL << n;
  for (std::int64_t s = 0; s < dim; ++s) {
    if (state.amplitudes(s) == cxd(0.0, 0.0)) continue;
    std::int64_t ra = 0, rb = 0;
    int crossings = 0;
    for (int t = 0; t < na; ++t) {
      if ((s >> region.sites[t]) & 1) {
        ra |= 1LL << t;
        crossings += std::popcount(static_cast<std::uint32_t>(s) & rest_below[t]);
      }
    }
    for (int t = 0; t < nb; ++t) rb |= ((s >> rest[t]) & 1) << t;
    m(ra, rb) = (crossings & 1) ? -state.amplitudes(s) : state.amplitudes(s);
  }
  Eigen::BDCSVD<MatrixXcd> svd(m);
  double entropy = 0.0;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    const double p = svd.singularValues()(i) * svd.singularValues()(i);
    if (p > 1e-16) entropy -= p * std::log(p);
  }
  return entropy;
}

DenseState imaginary_time_reference(const DenseState& state,
                                    const Eigen::VectorXd& diag_generator, double tau) {
  check_full_space(state);
  if (tau < 0.0) throw std::invalid_argument("tau must be >= 0");
  if (diag_generator.size() != state.amplitudes.size())
    throw std::invalid_argument("generator diagonal length mismatch");
  VectorXcd out = state.amplitudes;
  for (std::int64_t m = 0; m < out.size(); ++m) out(m) *= std::exp(-tau * diag_generator(m));
  return normalized(std::move(out), state.n_sites);
}

DenseState imaginary_time_reference(const DenseState& state, const Eigen::MatrixXcd& generator,
                                    double tau) {
  check_full_space(state);
  if (state.n_sites > 12)
    throw std::invalid_argument("dense generator guard: n_sites <= 12");
  if (tau < 0.0) throw std::invalid_argument("tau must be >= 0");
  if (generator.rows() != state.amplitudes.size() || generator.cols() != generator.rows())
    throw std::invalid_argument("generator shape mismatch");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(generator);
  const VectorXd ew = (-tau * es.eigenvalues().array()).exp();
  VectorXcd out = es.eigenvectors() *
                  (ew.asDiagonal() * (es.eigenvectors().adjoint() * state.amplitudes));
  return normalized(std::move(out), state.n_sites);
}

} // namespace mipt::ed
