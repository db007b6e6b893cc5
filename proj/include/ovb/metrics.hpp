#pragma once

#include "ovb/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

namespace ovb {

inline constexpr double kInfNorm = std::numeric_limits<double>::infinity();

/// l_p norm, p >= 1 or infinity.
double lp_norm(const VecN& v, double p);

struct DiscrepancyValues {
  double max_prefix = 0.0;
  double final = 0.0;
};

/// Exact prefix norms of a transcript for one p.
DiscrepancyValues discrepancy(const Transcript& transcript, double p);

struct GrowthFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS
};

struct GrowthPoint {
  double horizon = 0.0;
  double statistic = 0.0;
};

/// Least squares of statistic = slope * sqrt(ln T) + intercept over >= 3
/// points with distinct horizons T >= 4.
GrowthFit growth_fit(const std::vector<GrowthPoint>& points);

/// Plug-in psi2 of <prefix_t, w> sampled across replicated transcripts that
/// share one input sequence. An estimator, not a certificate.
double empirical_direction_psi2(const std::vector<Transcript>& transcripts, int t, const VecN& w,
                                double tol = 1e-12);

/// Linear-interpolation quantile of a sample, q in [0, 1].
double quantile(std::vector<double> values, double q);

struct ReplicateStats {
  int replicate = 0;
  std::uint64_t seed = 0;
  double max_prefix_linf = 0.0;
  double max_prefix_l2 = 0.0;
  std::vector<double> final_lp;  // aligned with DiscrepancyReport::p_values
};

struct Aggregate {
  double mean = 0.0;
  double median = 0.0;
  double q90 = 0.0;
};

/// Replicated prefix-discrepancy summary: per-replicate maxima plus
/// mean / median / 0.9-quantile aggregates.
struct DiscrepancyReport {
  std::vector<double> p_values;
  std::vector<ReplicateStats> replicates;

  static DiscrepancyReport from_transcripts(const std::vector<Transcript>& transcripts,
                                            const std::vector<std::uint64_t>& seeds,
                                            const std::vector<double>& p_values);

  Aggregate aggregate_max_linf() const;
  Aggregate aggregate_max_l2() const;
  Aggregate aggregate_final_lp(std::size_t p_index) const;

  void write_csv(std::ostream& out) const;
};

Aggregate aggregate(const std::vector<double>& values);

}  // namespace ovb
