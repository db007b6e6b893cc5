#include "ovb/verify.hpp"

#include "ovb/gauss1d.hpp"
#include "ovb/psi2.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ovb {

namespace {

double binomial_se(double p, std::uint64_t n) {
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

}  // namespace

McResult mc_gaussian_mgf_check(double lambda, std::uint64_t samples, RandomStream stream,
                               double rel_tol) {
  if (lambda > 0.4) throw std::invalid_argument("mc_gaussian_mgf_check: lambda must be <= 0.4");
  if (samples == 0) throw std::invalid_argument("mc_gaussian_mgf_check: no samples");

  McResult res;
  res.operation = "mc_gaussian_mgf_check";
  res.samples = samples;
  res.master_seed = stream.master_seed();
  res.stream_id = stream.stream_id();
  res.bound = gaussian_mgf(lambda);
  res.direction = "eq";
  // E[exp(2 lambda g^2)] diverges from lambda = 1/4 on, so the plain mean
  // has infinite variance there; fall back to median-of-means.
  res.median_of_means = lambda >= 0.25;

  const int groups = res.median_of_means ? 32 : 1;
  const std::uint64_t per_group = samples / static_cast<std::uint64_t>(groups);
  std::vector<double> group_means;
  group_means.reserve(static_cast<std::size_t>(groups));
  double total = 0.0, total_sq = 0.0;
  for (int g = 0; g < groups; ++g) {
    double s = 0.0;
    for (std::uint64_t i = 0; i < per_group; ++i) {
      const double x = stream.next_gaussian();
      const double value = std::exp(lambda * x * x);
      s += value;
      total += value;
      total_sq += value * value;
    }
    group_means.push_back(s / static_cast<double>(per_group));
  }
  const double used = static_cast<double>(per_group * static_cast<std::uint64_t>(groups));

  if (res.median_of_means) {
    std::sort(group_means.begin(), group_means.end());
    const std::size_t mid = group_means.size() / 2;
    res.estimate = 0.5 * (group_means[mid - 1] + group_means[mid]);
    res.standard_error = binomial_se(0.5, static_cast<std::uint64_t>(groups));  // nominal
    res.slack = rel_tol * res.bound - std::abs(res.estimate - res.bound);
    res.satisfied = std::abs(res.estimate - res.bound) <= rel_tol * res.bound;
  } else {
    res.estimate = total / used;
    const double var = std::max(0.0, total_sq / used - res.estimate * res.estimate);
    res.standard_error = std::sqrt(var / used);
    res.slack = 3.0 * res.standard_error - std::abs(res.estimate - res.bound);
    res.satisfied = std::abs(res.estimate - res.bound) <= 3.0 * res.standard_error;
  }
  return res;
}

McResult mc_single_w_tail(double C, int N, std::uint64_t trials, RandomStream stream) {
  if (C <= 2.0) throw std::invalid_argument("mc_single_w_tail: C must exceed 2 (divergent mean)");
  if (N < 1 || trials == 0) throw std::invalid_argument("mc_single_w_tail: N and trials >= 1");

  McResult res;
  res.operation = "mc_single_w_tail";
  res.samples = trials;
  res.master_seed = stream.master_seed();
  res.stream_id = stream.stream_id();
  res.direction = "ge";

  std::uint64_t hits = 0;
  const double cutoff = 2.0 * static_cast<double>(N);
  for (std::uint64_t t = 0; t < trials; ++t) {
    double sum = 0.0;
    for (int l = 0; l < N; ++l) {
      const double g = stream.next_gaussian();
      sum += std::exp(g * g / C);
      if (sum > cutoff) break;
    }
    if (sum > cutoff) ++hits;
  }
  res.estimate = static_cast<double>(hits) / static_cast<double>(trials);
  res.standard_error = binomial_se(res.estimate, trials);

  // Single-maximum lower bound via the one-sided normal CDF.
  const double threshold = std::sqrt(C * std::log(cutoff));
  res.bound = 1.0 - std::pow(normal_cdf(threshold), N);
  const double se_cmp = binomial_se(std::max(res.estimate, res.bound), trials);
  res.slack = res.estimate - res.bound + 3.0 * se_cmp;
  res.satisfied = res.slack >= 0.0;
  res.extras.emplace_back("hits", static_cast<double>(hits));
  return res;
}

BodyMembership classify_body_membership(const std::vector<VecN>& blocks, double delta,
                                        const Net& net, double tol) {
  const auto bracket = psi2_vector_bracket(FiniteVectorDistribution::uniform(blocks), net, tol);
  const double threshold = 2.0 + delta;
  if (bracket.upper <= threshold) return BodyMembership::Inside;
  if (bracket.lower > threshold) return BodyMembership::Outside;
  return BodyMembership::Indeterminate;
}

McResult mc_body_measure(int n, int N, double delta, const Net& net, std::uint64_t trials,
                         RandomStream stream) {
  if (n < 1 || N < 1) throw std::invalid_argument("mc_body_measure: n and N must be >= 1");
  if (static_cast<std::int64_t>(n) * N > 10000)
    throw std::invalid_argument("mc_body_measure: n*N exceeds 1e4 cap");
  if (net.dimension != n) throw std::invalid_argument("mc_body_measure: net dimension mismatch");
  if (trials == 0) throw std::invalid_argument("mc_body_measure: no trials");

  std::uint64_t inside = 0, outside = 0, indeterminate = 0;
  std::vector<VecN> blocks(static_cast<std::size_t>(N));
  for (std::uint64_t t = 0; t < trials; ++t) {
    for (auto& b : blocks) b = standard_gaussian_sample(stream, n);
    switch (classify_body_membership(blocks, delta, net)) {
      case BodyMembership::Inside: ++inside; break;
      case BodyMembership::Outside: ++outside; break;
      case BodyMembership::Indeterminate: ++indeterminate; break;
    }
  }

  McResult res;
  res.operation = "mc_body_measure";
  res.samples = trials;
  res.master_seed = stream.master_seed();
  res.stream_id = stream.stream_id();
  res.estimate = static_cast<double>(inside) / static_cast<double>(trials);
  res.standard_error = binomial_se(res.estimate, trials);
  res.direction = "ge";
  res.bound = 0.0;  // the rate constant is not quantified; callers compare across N
  res.satisfied = true;
  res.extras.emplace_back("inside", static_cast<double>(inside) / static_cast<double>(trials));
  res.extras.emplace_back("outside", static_cast<double>(outside) / static_cast<double>(trials));
  res.extras.emplace_back("indeterminate",
                          static_cast<double>(indeterminate) / static_cast<double>(trials));
  return res;
}

RosenthalCheck rosenthal_check(const FiniteScalarDistribution& dist, int N, double p) {
  if (N < 1 || N > 20) throw std::invalid_argument("rosenthal_check: N must lie in [1, 20]");
  if (p < 2.0) throw std::invalid_argument("rosenthal_check: p must be >= 2");
  if (std::abs(dist.mean()) > 1e-12)
    throw std::invalid_argument("rosenthal_check: distribution must be mean zero");
  const std::size_t support = dist.atoms().size();
  double combos = 1.0;
  for (int i = 0; i < N; ++i) combos *= static_cast<double>(support);
  if (combos > 1e7) throw std::invalid_argument("rosenthal_check: enumeration too large");

  // Odometer over the product distribution.
  std::vector<std::size_t> idx(static_cast<std::size_t>(N), 0);
  double pth_moment = 0.0;
  bool done = false;
  while (!done) {
    double sum = 0.0, prob = 1.0;
    for (int i = 0; i < N; ++i) {
      const auto& atom = dist.atoms()[idx[static_cast<std::size_t>(i)]];
      sum += atom.value;
      prob *= atom.probability;
    }
    pth_moment += prob * std::pow(std::abs(sum), p);
    done = true;
    for (int i = 0; i < N; ++i) {
      if (++idx[static_cast<std::size_t>(i)] < support) {
        done = false;
        break;
      }
      idx[static_cast<std::size_t>(i)] = 0;
    }
  }

  double abs_p = 0.0, second = 0.0;
  for (const auto& a : dist.atoms()) {
    abs_p += a.probability * std::pow(std::abs(a.value), p);
    second += a.probability * a.value * a.value;
  }

  RosenthalCheck check;
  check.lhs = std::pow(pth_moment, 1.0 / p);
  check.rhs = std::pow(2.0, p) * std::max(std::pow(static_cast<double>(N) * abs_p, 1.0 / p),
                                          std::sqrt(static_cast<double>(N) * second));
  check.ratio = check.rhs == 0.0 ? 0.0 : check.lhs / check.rhs;
  return check;
}

}  // namespace ovb
