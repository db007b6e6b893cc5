#pragma once

#include <limits>

namespace ovb {

/// Largest shift length with a known measure-monotone star operation;
/// callers may pass anything smaller.
inline constexpr double kDefaultStarBeta = 0.2001;

/// Closed interval on the real line, possibly empty, with +-infinity
/// sentinels allowed as endpoints.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool is_empty = true;

  static Interval empty() { return Interval{}; }
  static Interval of(double lo, double hi);
  static Interval whole_line() {
    return of(-std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity());
  }

  double length() const;
  bool contains(double x, double slack = 0.0) const;
  /// Set containment: every point of this lies in other (up to slack).
  bool subset_of(const Interval& other, double slack = 0.0) const;
  bool symmetric(double tol = 1e-9) const;
};

Interval intersect(const Interval& a, const Interval& b);

/// Standard normal CDF, absolute error below 1e-15.
double normal_cdf(double x);

/// Inverse standard normal CDF on (0, 1), refined to machine accuracy.
double normal_quantile(double p);

/// Standard Gaussian measure of an interval.
double gaussian_measure(const Interval& iv);

/// Symmetric interval [-a, a] with Gaussian measure p, 0 < p < 1.
Interval symmetric_interval_for_measure(double p);

/// One-dimensional star body: if the chord of K in direction u is long
/// (length >= 2|u|), the union of the two translates is an interval and is
/// returned; otherwise there is no long line and the result is empty.
Interval star_1d(const Interval& k, double u);

/// E[exp(lambda g^2)] for g ~ N(0,1); diverges at lambda >= 1/2.
double gaussian_mgf(double lambda);

}  // namespace ovb
