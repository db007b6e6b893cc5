#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ovb/adversaries.hpp"
#include "ovb/signers.hpp"

#include <cmath>

using namespace ovb;

TEST_CASE("block length in base 2 and base e") {
  CHECK(block_length(16, 2.0) == 2);
  CHECK(block_length(64, 2.0) == 3);
  CHECK(block_length(4096, 2.0) == 6);
  CHECK(block_length(16, std::exp(1.0)) == 2);  // ceil(0.5 ln 16) = ceil(1.386)
}

TEST_CASE("oblivious block construction starts at e1 and stays orthogonal") {
  AdversaryParams params;
  Adversary adv(AdversaryKind::ObliviousBlock, 2, 16, params, RandomStream(3, 0));
  REQUIRE(adv.block_len() == 2);

  VecN partial = VecN::Zero(2);
  int emitted = 0;
  while (emitted < 16) {
    const int in_block = emitted % adv.block_len();
    const int block = emitted / adv.block_len();
    const VecN v = adv.next();
    CHECK(std::abs(v.norm() - 1.0) <= 1e-12);
    if (in_block == 0) {
      partial = VecN::Zero(2);
      CHECK(v[0] == 1.0);
      CHECK(v[1] == 0.0);
    } else {
      CHECK(std::abs(v.dot(partial)) <= 1e-12);  // orthogonal to the y-signed sum
    }
    partial += static_cast<double>(
                   adv.block_signs()[static_cast<std::size_t>(block)]
                                    [static_cast<std::size_t>(in_block)]) *
               v;
    ++emitted;
  }
}

TEST_CASE("second block vector is e2 when y starts with +1") {
  // find a seed whose first pre-drawn sign is +1
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    AdversaryParams params;
    Adversary adv(AdversaryKind::ObliviousBlock, 2, 16, params, RandomStream(seed, 0));
    if (adv.block_signs()[0][0] != 1) continue;
    adv.next();
    const VecN second = adv.next();
    CHECK(second[0] == doctest::Approx(0.0));
    CHECK(second[1] == doctest::Approx(1.0));
    return;
  }
  FAIL("no seed with a leading +1 found in 32 tries");
}

TEST_CASE("emissions ignore the algorithm's signs") {
  AdversaryParams params;
  Adversary a(AdversaryKind::ObliviousBlock, 2, 64, params, RandomStream(17, 5));
  Adversary b(AdversaryKind::ObliviousBlock, 2, 64, params, RandomStream(17, 5));
  SignerParams sp;
  sp.walk_scale = 1.0;
  Signer greedy(SignerKind::Greedy, 2, sp, RandomStream(1, 0));
  Signer walk(SignerKind::SelfBalancingWalk, 2, sp, RandomStream(2, 0));
  for (int t = 0; t < 64; ++t) {
    const VecN va = a.next();
    const VecN vb = b.next();
    CHECK(va == vb);
    greedy.step(va);
    walk.step(vb);
  }
}

TEST_CASE("adaptive adversary rotates the prefix by ninety degrees") {
  AdversaryParams params;
  Adversary adv(AdversaryKind::AdaptiveOrthogonal, 2, 4, params, RandomStream(1, 0));
  VecN prefix(2);
  prefix << 3.0, 4.0;
  const VecN v = adv.next(&prefix);
  CHECK(v[0] == doctest::Approx(-0.8).epsilon(1e-12));
  CHECK(v[1] == doctest::Approx(0.6).epsilon(1e-12));

  VecN zero = VecN::Zero(2);
  const VecN at_zero = adv.next(&zero);
  CHECK(at_zero[0] == 1.0);

  CHECK_THROWS_AS(adv.next(), std::invalid_argument);  // prefix required
}

TEST_CASE("adaptive adversary forces sqrt(T) growth against any signer") {
  for (SignerKind kind : {SignerKind::UniformRandom, SignerKind::Greedy}) {
    SignerParams sp;
    AdversaryParams params;
    Adversary adv(AdversaryKind::AdaptiveOrthogonal, 2, 9, params, RandomStream(8, 0));
    Signer signer(kind, 2, sp, RandomStream(9, 0));
    for (int t = 0; t < 9; ++t) {
      VecN prefix = signer.prefix();
      signer.step(adv.next(&prefix));
    }
    CHECK(signer.prefix().norm() == doctest::Approx(3.0).epsilon(1e-9));
  }
}

TEST_CASE("edge stream emits rescaled incidence vectors") {
  AdversaryParams params;
  params.vertices = 3;
  params.edges = std::vector<std::pair<int, int>>{{0, 1}, {2, 0}};
  Adversary adv(AdversaryKind::EdgeStream, 3, 2, params, RandomStream(1, 0));
  const VecN first = adv.next();
  CHECK(first[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(first[1] == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(first[2] == 0.0);
  CHECK(std::abs(first.norm() - 1.0) <= 1e-12);

  const VecN second = adv.next();
  CHECK(second[2] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(second[0] == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));

  CHECK_THROWS_AS(adv.next(), std::runtime_error);  // horizon exhausted
}

TEST_CASE("random edge stream and iid samplers emit unit vectors") {
  AdversaryParams edge_params;
  edge_params.vertices = 5;
  Adversary edges(AdversaryKind::EdgeStream, 5, 50, edge_params, RandomStream(2, 0));
  for (int t = 0; t < 50; ++t) CHECK(std::abs(edges.next().norm() - 1.0) <= 1e-12);

  AdversaryParams sphere;
  Adversary iid(AdversaryKind::IidSampler, 4, 50, sphere, RandomStream(3, 0));
  for (int t = 0; t < 50; ++t) CHECK(std::abs(iid.next().norm() - 1.0) <= 1e-12);

  AdversaryParams cube;
  cube.iid_kind = IidKind::SignedHypercube;
  Adversary iid2(AdversaryKind::IidSampler, 4, 50, cube, RandomStream(4, 0));
  for (int t = 0; t < 50; ++t) {
    const VecN v = iid2.next();
    CHECK(std::abs(v.norm() - 1.0) <= 1e-12);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(v[i]) == doctest::Approx(0.5));
  }
}

TEST_CASE("block match frequency and matched block geometry") {
  const int T = 16;  // k = 2
  const int trials = 10000;
  int blocks_seen = 0, matches = 0;
  for (int trial = 0; trial < trials; ++trial) {
    AdversaryParams params;
    Adversary adv(AdversaryKind::ObliviousBlock, 2, T, params,
                  RandomStream(static_cast<std::uint64_t>(trial), 99));
    SignerParams sp;
    Signer signer(SignerKind::UniformRandom, 2, sp,
                  RandomStream(static_cast<std::uint64_t>(trial), 7));
    const int k = adv.block_len();
    std::vector<int> signs;
    std::vector<VecN> inputs;
    VecN before_block = VecN::Zero(2);
    for (int t = 0; t < T; ++t) {
      const VecN v = adv.next();
      inputs.push_back(v);
      signs.push_back(signer.step(v));
      if ((t + 1) % k == 0) {
        const int block = t / k;
        ++blocks_seen;
        bool match = true;
        for (int i = 0; i < k; ++i)
          match = match && signs[static_cast<std::size_t>(block * k + i)] ==
                               adv.block_signs()[static_cast<std::size_t>(block)]
                                                [static_cast<std::size_t>(i)];
        if (match) {
          ++matches;
          VecN block_sum = VecN::Zero(2);
          for (int i = 0; i < k; ++i)
            block_sum += static_cast<double>(signs[static_cast<std::size_t>(block * k + i)]) *
                         inputs[static_cast<std::size_t>(block * k + i)];
          CHECK(block_sum.norm() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
          // one of the block-boundary prefixes has large sup norm
          const VecN after = before_block + block_sum;
          const double linf = std::max(before_block.lpNorm<Eigen::Infinity>(),
                                       after.lpNorm<Eigen::Infinity>());
          CHECK(linf >= std::sqrt(2.0) / (2.0 * std::sqrt(2.0)) - 1e-9);
        }
        VecN block_sum = VecN::Zero(2);
        for (int i = 0; i < k; ++i)
          block_sum += static_cast<double>(signs[static_cast<std::size_t>(block * k + i)]) *
                       inputs[static_cast<std::size_t>(block * k + i)];
        before_block += block_sum;
      }
    }
  }
  const double freq = matches / static_cast<double>(blocks_seen);
  const double expected = 0.25;  // 2^-k
  const double se = std::sqrt(expected * (1.0 - expected) / blocks_seen);
  CHECK(std::abs(freq - expected) <= 3.0 * se);
}

TEST_CASE("argument contracts") {
  AdversaryParams params;
  Adversary adv(AdversaryKind::ObliviousBlock, 2, 4, params, RandomStream(1, 0));
  VecN prefix = VecN::Zero(2);
  CHECK_THROWS_AS(adv.next(&prefix), std::invalid_argument);  // oblivious takes no prefix
  CHECK_THROWS_AS(Adversary(AdversaryKind::FixedSequence, 2, 4, params, RandomStream(1, 0)),
                  std::invalid_argument);  // no sequence given
}
