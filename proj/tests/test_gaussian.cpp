#include "doctest.h"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "mipt/gaussian.hpp"

using namespace mipt;
using namespace mipt::gaussian;
using cxd = std::complex<double>;

namespace {

ModelSpec chain(int n, lattice::Boundary boundary, double filling = 0.5) {
  return {n, boundary, 0.0, 1.0, filling};
}

MeasurementSpec staggered(double w) {
  MeasurementSpec m;
  m.kind = MeasurementKind::density_staggered;
  m.strength = w;
  return m;
}

MeasurementSpec bond_kind(MeasurementKind kind, double w) {
  MeasurementSpec m;
  m.kind = kind;
  m.strength = w;
  return m;
}

} // namespace

TEST_SUITE_BEGIN("gaussian");

TEST_CASE("two-site ground state is the bonding orbital") {
  const SlaterState s = ground_state_quadratic(chain(2, lattice::Boundary::open));
  REQUIRE(s.n_particles() == 1);
  CHECK(std::abs(s.orbitals(0, 0)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::abs(s.orbitals(1, 0)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(entanglement_entropy(s, Region::range(0, 1)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("free ground energy and degeneracy guard") {
  CHECK(ground_energy_quadratic(chain(8, lattice::Boundary::open)) ==
        doctest::Approx(-4.7587704831436335).epsilon(1e-14));
  CHECK_THROWS_AS(ground_state_quadratic(chain(4, lattice::Boundary::periodic)),
                  std::runtime_error);
  CHECK_THROWS_AS(ground_state_quadratic(chain(8, lattice::Boundary::periodic)),
                  std::runtime_error);
  CHECK_NOTHROW(ground_state_quadratic(chain(6, lattice::Boundary::periodic)));
  CHECK_NOTHROW(ground_state_quadratic(chain(10, lattice::Boundary::periodic)));
  ModelSpec interacting = chain(8, lattice::Boundary::open);
  interacting.delta = 0.3;
  CHECK_THROWS_AS(ground_state_quadratic(interacting), std::invalid_argument);
}

TEST_CASE("correlation matrix is a projector") {
  const SlaterState s = ground_state_quadratic(chain(10, lattice::Boundary::periodic));
  const Eigen::MatrixXcd c = correlation_matrix(s);
  CHECK((c * c - c).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((c - c.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(c.trace().real() - 5.0) < 1e-12);
}

TEST_CASE("entropy is invariant under an orbital basis rotation") {
  const SlaterState s = ground_state_quadratic(chain(8, lattice::Boundary::open));
  const int np = s.n_particles();
  Eigen::MatrixXcd seed(np, np);
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < np; ++j)
      seed(i, j) = cxd(std::sin(1.0 + i + 2 * j), std::cos(2.0 + 3 * i + j));
  const Eigen::MatrixXcd q =
      Eigen::HouseholderQR<Eigen::MatrixXcd>(seed).householderQ() *
      Eigen::MatrixXcd::Identity(np, np);
  const SlaterState rotated{s.orbitals * q};
  for (int cut = 1; cut < 8; ++cut) {
    CHECK(entanglement_entropy(s, Region::range(0, cut)) ==
          doctest::Approx(entanglement_entropy(rotated, Region::range(0, cut)))
              .epsilon(1e-11));
  }
}

TEST_CASE("pure-state complement symmetry and region edge cases") {
  GaussianState state = ground_state_quadratic(chain(10, lattice::Boundary::periodic));
  state = apply_measurement(state, staggered(0.8), lattice::Boundary::periodic);
  for (int cut : {1, 3, 5}) {
    const double sa = entanglement_entropy(state, Region::range(0, cut));
    const double sb = entanglement_entropy(state, Region::range(cut, 10));
    CHECK(sa == doctest::Approx(sb).epsilon(1e-9));
  }
  CHECK(entanglement_entropy(state, Region{{}}) == 0.0);
  CHECK(entanglement_entropy(state, Region::range(0, 10)) < 1e-9);
  CHECK_THROWS_AS(entanglement_entropy(state, Region::range(0, 11)), std::invalid_argument);
}

TEST_CASE("zero-strength measurement is the identity") {
  const SlaterState s = ground_state_quadratic(chain(6, lattice::Boundary::periodic));
  for (MeasurementKind kind : {MeasurementKind::density_staggered,
                               MeasurementKind::bond_xx_yy_paired, MeasurementKind::bond_xx}) {
    GaussianState out =
        apply_measurement(GaussianState{s}, bond_kind(kind, 0.0), lattice::Boundary::periodic);
    for (int cut : {1, 2, 3}) {
      CHECK(entanglement_entropy(out, Region::range(0, cut)) ==
            doctest::Approx(entanglement_entropy(s, Region::range(0, cut))).epsilon(1e-10));
    }
  }
}

TEST_CASE("staggered measurements compose additively in strength") {
  const SlaterState s = ground_state_quadratic(chain(6, lattice::Boundary::open));
  const SlaterState once = apply_measurement(s, staggered(1.1));
  const SlaterState twice = apply_measurement(apply_measurement(s, staggered(0.4)),
                                              staggered(0.7));
  for (int cut = 1; cut < 6; ++cut) {
    CHECK(entanglement_entropy(once, Region::range(0, cut)) ==
          doctest::Approx(entanglement_entropy(twice, Region::range(0, cut)))
              .epsilon(1e-10));
  }
}

TEST_CASE("two-site staggered entropy closed form") {
  const double w = 0.7;
  const SlaterState s = ground_state_quadratic(chain(2, lattice::Boundary::open));
  const SlaterState out = apply_measurement(s, staggered(w));
  const double p = std::exp(2.0 * w) / (2.0 * std::cosh(2.0 * w));
  const double expected = -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
  CHECK(expected == doctest::Approx(0.21954051880480389).epsilon(1e-13));
  CHECK(entanglement_entropy(out, Region::range(0, 1)) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("paired bond measurement fixes the two-site bonding state") {
  // the bonding orbital is an eigenvector of the bond generator, so the
  // measurement only rescales it
  const SlaterState s = ground_state_quadratic(chain(2, lattice::Boundary::open));
  const SlaterState out =
      apply_measurement(s, bond_kind(MeasurementKind::bond_xx_yy_paired, 0.9));
  CHECK(entanglement_entropy(out, Region::range(0, 1)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("entropy decreases monotonically with measurement strength") {
  const SlaterState s = ground_state_quadratic(chain(34, lattice::Boundary::periodic));
  double prev = entanglement_entropy(s, Region::range(0, 17));
  for (double w : {0.25, 0.5, 1.0, 2.0, 5.0}) {
    const SlaterState out = apply_measurement(s, staggered(w));
    const double ee = entanglement_entropy(out, Region::range(0, 17));
    CHECK(ee < prev);
    prev = ee;
  }
  CHECK(prev < 0.2); // W = 5 has almost no entanglement left
}

TEST_CASE("slater path rejects the pairing kind") {
  const SlaterState s = ground_state_quadratic(chain(6, lattice::Boundary::open));
  CHECK_THROWS_AS(apply_measurement(s, bond_kind(MeasurementKind::bond_xx, 0.5)),
                  std::invalid_argument);
}

TEST_CASE("promotion to the Bogoliubov representation is consistent") {
  const SlaterState s = ground_state_quadratic(chain(6, lattice::Boundary::periodic));
  const BogoliubovState b = to_bogoliubov(s);
  CHECK(b.fermion_parity == -1); // three particles
  const Eigen::MatrixXcd xi_ortho =
      b.u.adjoint() * b.u + b.v.adjoint() * b.v - Eigen::MatrixXcd::Identity(6, 6);
  CHECK(xi_ortho.cwiseAbs().maxCoeff() < 1e-12);
  CHECK((normal_correlation(b) - correlation_matrix(s)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(anomalous_correlation(b).cwiseAbs().maxCoeff() < 1e-12);
  for (int cut = 1; cut < 6; ++cut) {
    CHECK(entanglement_entropy(b, Region::range(0, cut)) ==
          doctest::Approx(entanglement_entropy(s, Region::range(0, cut))).epsilon(1e-10));
  }
}

TEST_CASE("number-conserving kinds agree between representations") {
  const SlaterState s = ground_state_quadratic(chain(6, lattice::Boundary::open));
  for (MeasurementKind kind :
       {MeasurementKind::density_staggered, MeasurementKind::bond_xx_yy_paired}) {
    const SlaterState slater_out = apply_measurement(s, bond_kind(kind, 0.8));
    const BogoliubovState bogo_out =
        apply_measurement(to_bogoliubov(s), bond_kind(kind, 0.8));
    for (int cut = 1; cut < 6; ++cut) {
      CHECK(entanglement_entropy(slater_out, Region::range(0, cut)) ==
            doctest::Approx(entanglement_entropy(bogo_out, Region::range(0, cut)))
                .epsilon(1e-9));
    }
  }
}

TEST_CASE("pairing measurement keeps the anomalous part antisymmetric") {
  const SlaterState s = ground_state_quadratic(chain(6, lattice::Boundary::periodic));
  const BogoliubovState out = apply_measurement(
      to_bogoliubov(s), bond_kind(MeasurementKind::bond_xx, 0.8), lattice::Boundary::periodic);
  const Eigen::MatrixXcd f = anomalous_correlation(out);
  CHECK((f + f.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  const Eigen::MatrixXcd ortho =
      out.u.adjoint() * out.u + out.v.adjoint() * out.v - Eigen::MatrixXcd::Identity(6, 6);
  CHECK(ortho.cwiseAbs().maxCoeff() < 1e-10);
  // wrap bond matters: open and periodic boundaries give different states
  const BogoliubovState open_out =
      apply_measurement(to_bogoliubov(s), bond_kind(MeasurementKind::bond_xx, 0.8),
                        lattice::Boundary::open);
  CHECK(std::abs(entanglement_entropy(out, Region::range(0, 3)) -
                 entanglement_entropy(open_out, Region::range(0, 3))) > 1e-6);
}

TEST_CASE("mutual information basics") {
  GaussianState state = ground_state_quadratic(chain(34, lattice::Boundary::periodic));
  state = apply_measurement(state, staggered(0.5), lattice::Boundary::periodic);
  const Region a = Region::range(0, 3);
  const Region b = Region::range(17, 20);
  CHECK(mutual_information(state, a, b) > 0.0);
  CHECK_THROWS_AS(mutual_information(state, a, Region::range(2, 5)), std::invalid_argument);
}

TEST_SUITE_END();
