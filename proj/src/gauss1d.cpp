#include "ovb/gauss1d.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ovb {

Interval Interval::of(double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi)) throw std::invalid_argument("interval: NaN endpoint");
  if (lo > hi) throw std::invalid_argument("interval: lo > hi");
  Interval iv;
  iv.lo = lo;
  iv.hi = hi;
  iv.is_empty = false;
  return iv;
}

double Interval::length() const {
  if (is_empty) return 0.0;
  return hi - lo;
}

bool Interval::contains(double x, double slack) const {
  if (is_empty) return false;
  return x >= lo - slack && x <= hi + slack;
}

bool Interval::subset_of(const Interval& other, double slack) const {
  if (is_empty) return true;
  if (other.is_empty) return false;
  return lo >= other.lo - slack && hi <= other.hi + slack;
}

bool Interval::symmetric(double tol) const {
  if (is_empty) return false;
  if (std::isinf(lo) || std::isinf(hi)) return lo == -hi;
  return std::abs(lo + hi) <= tol;
}

Interval intersect(const Interval& a, const Interval& b) {
  if (a.is_empty || b.is_empty) return Interval::empty();
  const double lo = std::max(a.lo, b.lo);
  const double hi = std::min(a.hi, b.hi);
  if (lo > hi) return Interval::empty();
  return Interval::of(lo, hi);
}

double normal_cdf(double x) {
  // erfc keeps full relative accuracy in the lower tail.
  return 0.5 * std::erfc(-x * std::numbers::sqrt2 * 0.5);
}

namespace {

// Acklam's rational initial guess for the normal quantile.
double quantile_guess(double p) {
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must be in (0,1)");
  double x = quantile_guess(p);
  // Two Halley refinements against the erfc-based CDF.
  constexpr double sqrt_two_pi = 2.5066282746310002;
  for (int it = 0; it < 2; ++it) {
    const double err = normal_cdf(x) - p;
    const double u = err * sqrt_two_pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double gaussian_measure(const Interval& iv) {
  if (iv.is_empty) return 0.0;
  // Difference of erfc values avoids cancellation in the tails.
  const double upper = std::erfc(-iv.hi * std::numbers::sqrt2 * 0.5);
  const double lower = std::erfc(-iv.lo * std::numbers::sqrt2 * 0.5);
  double m = 0.5 * (upper - lower);
  if (m < 0.0) m = 0.0;
  if (m > 1.0) m = 1.0;
  return m;
}

Interval symmetric_interval_for_measure(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("symmetric_interval_for_measure: p must be in (0,1)");
  const double a = normal_quantile(0.5 * (1.0 + p));
  return Interval::of(-a, a);
}

Interval star_1d(const Interval& k, double u) {
  if (k.is_empty) throw std::invalid_argument("star_1d: empty body");
  const double shift = std::abs(u);
  if (k.length() < 2.0 * shift) return Interval::empty();
  return Interval::of(k.lo - shift, k.hi + shift);
}

double gaussian_mgf(double lambda) {
  if (lambda >= 0.5) throw std::domain_error("gaussian_mgf: diverges for lambda >= 1/2");
  return 1.0 / std::sqrt(1.0 - 2.0 * lambda);
}

}  // namespace ovb
