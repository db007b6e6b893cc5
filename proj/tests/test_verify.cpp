#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ovb/gauss1d.hpp"
#include "ovb/verify.hpp"
#include "test_util.hpp"

#include <cmath>
#include <numbers>

using namespace ovb;

namespace {

Net one_dim_net() {
  Net net;
  net.dimension = 1;
  net.epsilon = 0.0;
  net.points.push_back(VecN::Constant(1, 1.0));
  net.points.push_back(VecN::Constant(1, -1.0));
  return net;
}

}  // namespace

TEST_CASE("mgf check is exact at lambda zero") {
  const auto res = mc_gaussian_mgf_check(0.0, 1000, RandomStream(1, 0));
  CHECK(res.estimate == 1.0);
  CHECK(res.bound == 1.0);
  CHECK(res.satisfied);
  CHECK_FALSE(res.median_of_means);
}

TEST_CASE("mgf check at lambda 0.1 sits within three standard errors") {
  const auto res = mc_gaussian_mgf_check(0.1, 1000000, RandomStream(2, 0));
  CHECK(res.bound == doctest::Approx(1.0 / std::sqrt(0.8)).epsilon(1e-12));
  CHECK(std::abs(res.estimate - res.bound) <= 3.0 * res.standard_error);
  CHECK(res.satisfied);
}

TEST_CASE("mgf check at lambda 0.25 switches to median of means") {
  const auto res = mc_gaussian_mgf_check(0.25, 1000000, RandomStream(3, 0));
  CHECK(res.median_of_means);
  CHECK(res.bound == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::abs(res.estimate - res.bound) <= 0.02 * res.bound);
  CHECK(res.satisfied);
}

TEST_CASE("mgf check rejects lambda beyond 0.4") {
  CHECK_THROWS_AS(mc_gaussian_mgf_check(0.45, 100, RandomStream(1, 0)), std::invalid_argument);
}

TEST_CASE("single-direction tail at N = 1 matches the closed form") {
  const double C = 8.0;
  const auto res = mc_single_w_tail(C, 1, 200000, RandomStream(4, 0));
  // exp(g^2/C) > 2 iff |g| > sqrt(C ln 2)
  const double threshold = std::sqrt(C * std::numbers::ln2);
  const double exact = 2.0 * (1.0 - normal_cdf(threshold));
  CHECK(std::abs(res.estimate - exact) <= 3.0 * res.standard_error + 1e-9);
  CHECK(res.satisfied);  // dominates the one-sided single-max bound

  CHECK_THROWS_AS(mc_single_w_tail(2.0, 4, 100, RandomStream(1, 0)), std::invalid_argument);
}

TEST_CASE("tail failure probability decays along an N grid") {
  const std::uint64_t trials = 100000;
  const auto at4 = mc_single_w_tail(8.0, 4, trials, RandomStream(5, 1));
  const auto at16 = mc_single_w_tail(8.0, 16, trials, RandomStream(5, 2));
  CHECK(at4.estimate > at16.estimate);
  CHECK(at4.satisfied);
  CHECK(at16.satisfied);
}

TEST_CASE("body membership classification on injected points") {
  const Net net = one_dim_net();
  // all-zero blocks: psi2 is 0, inside any threshold
  std::vector<VecN> zeros(4, VecN::Zero(1));
  CHECK(classify_body_membership(zeros, 0.5, net) == BodyMembership::Inside);

  // single huge block: point mass far outside
  std::vector<VecN> big = {VecN::Constant(1, 100.0)};
  CHECK(classify_body_membership(big, 0.5, net) == BodyMembership::Outside);
}

TEST_CASE("single-block inside frequency matches the Gaussian band") {
  // one block in dimension 1: inside iff |g| <= 2.5 sqrt(ln 2)
  const std::uint64_t trials = 10000;
  const auto res = mc_body_measure(1, 1, 0.5, one_dim_net(), trials, RandomStream(6, 0));
  const double edge = 2.5 * std::sqrt(std::numbers::ln2);
  const double expected = 2.0 * normal_cdf(edge) - 1.0;
  const double se = std::sqrt(expected * (1.0 - expected) / static_cast<double>(trials));
  CHECK(std::abs(res.estimate - expected) <= 3.0 * se);
  // frequencies sum to one
  double total = 0.0;
  for (const auto& [key, value] : res.extras) total += value;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("inside frequency grows with the clone count") {
  const std::uint64_t trials = 2000;
  const auto at4 = mc_body_measure(1, 4, 0.5, one_dim_net(), trials, RandomStream(7, 1));
  const auto at16 = mc_body_measure(1, 16, 0.5, one_dim_net(), trials, RandomStream(7, 2));
  CHECK(at16.estimate >= at4.estimate);
}

TEST_CASE("rosenthal on Rademacher sums") {
  const auto rademacher = FiniteScalarDistribution::uniform({-1.0, 1.0});
  const auto n1 = rosenthal_check(rademacher, 1, 2.0);
  CHECK(n1.lhs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(n1.rhs == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(n1.ratio == doctest::Approx(0.25).epsilon(1e-12));

  const auto n10 = rosenthal_check(rademacher, 10, 4.0);
  CHECK(std::pow(n10.lhs, 4.0) == doctest::Approx(280.0).epsilon(1e-9));  // 3N^2 - 2N
  CHECK(n10.rhs == doctest::Approx(16.0 * std::sqrt(10.0)).epsilon(1e-12));
  CHECK(n10.ratio < 1.0);
}

TEST_CASE("rosenthal degenerate and error cases") {
  const auto zero = FiniteScalarDistribution::point_mass(0.0);
  const auto res = rosenthal_check(zero, 3, 2.0);
  CHECK(res.lhs == 0.0);
  CHECK(res.ratio == 0.0);

  const auto biased = FiniteScalarDistribution::uniform({0.0, 1.0});
  CHECK_THROWS_AS(rosenthal_check(biased, 2, 2.0), std::invalid_argument);

  std::vector<double> wide;
  for (int i = -8; i <= 8; ++i) wide.push_back(static_cast<double>(i));
  const auto big_support = FiniteScalarDistribution::uniform(wide);
  CHECK_THROWS_AS(rosenthal_check(big_support, 20, 2.0), std::invalid_argument);
}

TEST_CASE("rosenthal ratio stays below one across distributions") {
  RandomStream stream(8, 0);
  const auto three_point = FiniteScalarDistribution::uniform({-1.0, 0.0, 1.0});
  for (int N : {1, 2, 5, 9, 12}) {
    for (double p : {2.0, 3.0, 4.0, 6.0}) {
      CHECK(rosenthal_check(three_point, N, p).ratio <= 1.0);
      const auto random = testutil::random_symmetric_dist(stream, 2, 2.0);
      if (std::pow(static_cast<double>(random.atoms().size()), N) <= 1e7)
        CHECK(rosenthal_check(random, N, p).ratio <= 1.0);
    }
  }
}
