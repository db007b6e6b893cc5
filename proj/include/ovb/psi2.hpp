#pragma once

#include "ovb/core.hpp"
#include "ovb/nets.hpp"

#include <span>

namespace ovb {

/// Two-sided enclosure of a vector subgaussian norm obtained from net
/// directions: the true sup over the sphere lies in [lower, upper] with
/// upper = lower / (1 - net_epsilon).
struct Psi2Bracket {
  double lower = 0.0;
  double upper = 0.0;
  double net_epsilon = 0.0;
};

/// Subgaussian norm inf{t > 0 : E[exp(X^2/t^2)] <= 2} of a finite-support
/// scalar distribution, by bisection on the monotone map t -> E[exp(X^2/t^2)].
/// The returned t satisfies E[exp(X^2/t^2)] <= 2 and is within tol of the
/// infimum. The all-zero distribution has norm 0.
double psi2_scalar(const FiniteScalarDistribution& dist, double tol = 1e-12);

/// Subgaussian norm of the standard Gaussian: sqrt(8/3), the root of
/// (1 - 2/t^2)^{-1/2} = 2.
double psi2_gaussian_analytic();

/// Bracket for the directional supremum of a vector distribution: the lower
/// bound maximizes psi2_scalar over net directions, the upper bound divides
/// by (1 - epsilon). Exact (epsilon 0) in dimension 1.
Psi2Bracket psi2_vector_bracket(const FiniteVectorDistribution& dist, const Net& net,
                                double tol = 1e-12);

/// Plug-in estimate: psi2_scalar of the empirical (uniform) distribution of
/// the samples. An estimator, not a certificate.
double psi2_empirical(std::span<const double> samples, double tol = 1e-12);

}  // namespace ovb
