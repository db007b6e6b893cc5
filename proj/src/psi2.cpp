#include "ovb/psi2.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ovb {

namespace {

double exp_moment(const FiniteScalarDistribution& dist, double t) {
  double s = 0.0;
  for (const auto& a : dist.atoms()) {
    const double z = a.value / t;
    s += a.probability * std::exp(z * z);  // overflows to +inf harmlessly
  }
  return s;
}

}  // namespace

double psi2_scalar(const FiniteScalarDistribution& dist, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("psi2_scalar: tol must be positive");
  const double max_abs = dist.max_abs_value();
  if (max_abs == 0.0) return 0.0;

  // Point-mass bound: a single atom at max|value| already needs
  // t = max|value| / sqrt(ln 2), so the moment at t_hi is <= 2.
  const double sqrt_ln2 = std::sqrt(std::numbers::ln2);
  double hi = std::max(1.0, max_abs) / sqrt_ln2;
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (exp_moment(dist, mid) > 2.0)
      lo = mid;
    else
      hi = mid;
  }
  // hi keeps E[exp(X^2/t^2)] <= 2, so tail and MGF consequences hold exactly.
  return hi;
}

double psi2_gaussian_analytic() { return std::sqrt(8.0 / 3.0); }

Psi2Bracket psi2_vector_bracket(const FiniteVectorDistribution& dist, const Net& net,
                                double tol) {
  if (net.points.empty()) throw std::invalid_argument("psi2_vector_bracket: empty net");
  if (net.dimension != dist.dimension())
    throw std::invalid_argument("psi2_vector_bracket: dimension mismatch");
  const double eps = net.dimension == 1 ? 0.0 : net.epsilon;
  if (!(eps < 1.0)) throw std::invalid_argument("psi2_vector_bracket: epsilon must be < 1");

  Psi2Bracket bracket;
  bracket.net_epsilon = eps;
  for (const auto& w : net.points)
    bracket.lower = std::max(bracket.lower, psi2_scalar(dist.project(w), tol));
  bracket.upper = bracket.lower / (1.0 - eps);
  return bracket;
}

double psi2_empirical(std::span<const double> samples, double tol) {
  if (samples.size() < 2) throw std::invalid_argument("psi2_empirical: need at least 2 samples");
  std::vector<double> values(samples.begin(), samples.end());
  return psi2_scalar(FiniteScalarDistribution::uniform(values), tol);
}

}  // namespace ovb
