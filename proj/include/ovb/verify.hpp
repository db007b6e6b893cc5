#pragma once

#include "ovb/core.hpp"
#include "ovb/nets.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ovb {

/// Monte Carlo estimate with its comparison against a reference value.
/// For one-sided probability bounds the standard error is taken under the
/// bound when the estimate falls below it, so zero-hit estimates are judged
/// fairly.
struct McResult {
  std::string operation;
  double estimate = 0.0;
  double standard_error = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  double bound = 0.0;
  /// "eq" (two-sided), "ge" (estimate must dominate bound).
  std::string direction;
  bool satisfied = false;
  double slack = 0.0;

  bool median_of_means = false;
  /// Extra per-operation outputs (e.g. classification frequencies).
  std::vector<std::pair<std::string, double>> extras;
};

/// Compares the sample mean of exp(lambda g^2) with (1-2lambda)^{-1/2}.
/// For lambda >= 0.25 the plain estimator has infinite variance, so a
/// median of 32 group means is used and judged at a relative tolerance.
McResult mc_gaussian_mgf_check(double lambda, std::uint64_t samples, RandomStream stream,
                               double rel_tol = 0.02);

/// Estimates Pr[sum_l exp(g_l^2 / C) > 2N] over iid standard normals and
/// checks it dominates the single-maximum analytic lower bound
/// 1 - Phi(sqrt(C ln(2N)))^N.
McResult mc_single_w_tail(double C, int N, std::uint64_t trials, RandomStream stream);

enum class BodyMembership { Inside, Outside, Indeterminate };

/// Bracket classification of one block sample against the threshold 2+delta.
BodyMembership classify_body_membership(const std::vector<VecN>& blocks, double delta,
                                        const Net& net, double tol = 1e-10);

/// Samples N standard normal blocks in dimension n per trial and reports
/// the inside / outside / indeterminate frequencies of the subgaussian body
/// at threshold 2+delta. The estimate is the inside frequency.
McResult mc_body_measure(int n, int N, double delta, const Net& net, std::uint64_t trials,
                         RandomStream stream);

struct RosenthalCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

/// Exact moment comparison for a sum of N iid mean-zero variables:
/// lhs = E[|X_1+...+X_N|^p]^{1/p} by support enumeration,
/// rhs = 2^p max((N E|X|^p)^{1/p}, (N E X^2)^{1/2}).
RosenthalCheck rosenthal_check(const FiniteScalarDistribution& dist, int N, double p);

}  // namespace ovb
