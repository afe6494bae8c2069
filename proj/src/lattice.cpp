#include "mipt/lattice.hpp"

#include <cmath>
#include <stdexcept>

namespace mipt::lattice {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

int particle_count(const ModelSpec& model) {
  const double n = model.filling * model.n_sites;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-9)
    throw std::invalid_argument("filling * n_sites must be an integer, got " + std::to_string(n));
  return static_cast<int>(rounded);
}

void validate(const ModelSpec& model) {
  if (model.n_sites < 2) throw std::invalid_argument("n_sites must be >= 2");
  if (model.filling <= 0.0 || model.filling > 0.5)
    throw std::invalid_argument("filling must lie in (0, 1/2]");
  particle_count(model);
}

std::string to_string(MeasurementKind kind) {
  switch (kind) {
    case MeasurementKind::density_staggered: return "density_staggered";
    case MeasurementKind::bond_xx_yy_paired: return "bond_xx_yy_paired";
    case MeasurementKind::bond_xx: return "bond_xx";
    case MeasurementKind::density_pattern: return "density_pattern";
  }
  throw std::logic_error("unknown MeasurementKind");
}

MeasurementKind measurement_kind_from_string(const std::string& name) {
  if (name == "density_staggered") return MeasurementKind::density_staggered;
  if (name == "bond_xx_yy_paired") return MeasurementKind::bond_xx_yy_paired;
  if (name == "bond_xx") return MeasurementKind::bond_xx;
  if (name == "density_pattern") return MeasurementKind::density_pattern;
  throw std::invalid_argument("unknown measurement kind: " + name);
}

void validate(const MeasurementSpec& meas, int n_sites) {
  if (meas.strength < 0.0) throw std::invalid_argument("measurement strength must be >= 0");
  if (meas.kind == MeasurementKind::density_pattern) {
    if (meas.pattern.empty()) throw std::invalid_argument("density_pattern requires a pattern");
    if (n_sites % static_cast<int>(meas.pattern.size()) != 0)
      throw std::invalid_argument("pattern length must divide n_sites");
  } else if (!meas.pattern.empty()) {
    throw std::invalid_argument("pattern is only valid for density_pattern");
  }
}

void validate(const ProtocolSpec& protocol) {
  if (protocol.chain_length < 1) throw std::invalid_argument("chain_length must be positive");
  if (protocol.filling <= 0.0 || protocol.filling > 0.5)
    throw std::invalid_argument("filling must lie in (0, 1/2]");
  if (protocol.period_weights.empty())
    throw std::invalid_argument("period_weights must be nonempty");
  for (double w : protocol.period_weights)
    if (w < 0.0) throw std::invalid_argument("period weights must be >= 0");
  if (protocol.chain_length % static_cast<int>(protocol.period_weights.size()) != 0)
    throw std::invalid_argument("period must divide chain_length");
}

double luttinger_k(double delta) {
  if (!(std::abs(delta) < 1.0))
    throw std::domain_error("luttinger_k requires |delta| < 1");
  return kPi / (2.0 * (kPi - std::acos(delta)));
}

double power_law_exponent(double k) {
  if (!(k > 0.0 && k < 1.0))
    throw std::domain_error("power_law_exponent requires 0 < K < 1");
  return 2.0 / k - 2.0;
}

double f_of_k(double k) {
  if (!(k > 0.0 && k < 1.0))
    throw std::domain_error("f_of_k requires 0 < K < 1");
  const double rk = std::sqrt(k);
  const double m = std::round(1.0 / rk);
  if (m >= 2.0 && std::abs(rk - 1.0 / m) < 1e-9)
    throw std::domain_error("f_of_k: cot(pi/sqrt(K)) pole at sqrt(K) = 1/" +
                            std::to_string(static_cast<int>(m)));
  const double x = kPi / rk;
  const double cot = std::cos(x) / std::sin(x);
  return (1.0 / (1.0 - 2.0 / k) - 1.0 / (2.0 - 2.0 / k)) * (x * cot - 1.0);
}

double dilog(double z) {
  if (!(z >= -1.0 && z <= 1.0))
    throw std::domain_error("dilog defined on [-1, 1]");
  if (z == 1.0) return kPi * kPi / 6.0;
  if (z > 0.5)  // reflection: Li2(z) + Li2(1-z) = pi^2/6 - ln z ln(1-z)
    return kPi * kPi / 6.0 - std::log(z) * std::log1p(-z) - dilog(1.0 - z);
  if (z < -0.5) // Landen: Li2(z) = -Li2(z/(z-1)) - ln^2(1-z)/2
    return -dilog(z / (z - 1.0)) - 0.5 * std::log1p(-z) * std::log1p(-z);
  if (z == 0.0) return 0.0;
  double sum = 0.0, term = z;
  for (int n = 1; n <= 200; ++n) {
    sum += term / (static_cast<double>(n) * n);
    term *= z;
    if (std::abs(term) < 1e-17 * (n + 1.0) * (n + 1.0)) break;
  }
  return sum;
}

double c_eff_theory(double w) {
  if (w < 0.0) throw std::domain_error("c_eff_theory requires W >= 0");
  const double s = 1.0 / std::cosh(2.0 * w);
  const double eps = 1.0 - s;
  if (eps < 1e-8) return 1.0 - 1.5 * eps; // s -> 1 limit; exact at W=0
  const double bracket =
      ((1.0 + s) * std::log1p(s) + eps * std::log(eps)) * std::log(s) +
      (1.0 + s) * dilog(-s) + eps * dilog(s);
  return -6.0 / (kPi * kPi) * bracket;
}

SuccessProbability success_probability(const ProtocolSpec& protocol) {
  validate(protocol);
  const auto& weights = protocol.period_weights;
  const int period = static_cast<int>(weights.size());
  double p = 1.0;
  for (int j = 0; j < protocol.chain_length; ++j)
    p *= 1.0 - (1.0 - std::exp(-2.0 * weights[j % period])) * protocol.filling;
  const double bound = std::pow(1.0 - protocol.filling, protocol.chain_length);
  if (p < bound - 1e-15)
    throw std::logic_error("success probability fell below its lower bound");
  return {p, bound};
}

} // namespace mipt::lattice
