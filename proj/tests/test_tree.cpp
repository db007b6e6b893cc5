#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ovb/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

using namespace ovb;

namespace {

const double kTwoPoint = 1.0 / std::sqrt(std::numbers::ln2);

TreeEdge make_edge(int parent, int child, double value) {
  TreeEdge e;
  e.parent = parent;
  e.child = child;
  e.vector = VecN::Constant(1, value);
  return e;
}

TreeSpec unit_path(int length) {
  std::vector<TreeEdge> edges;
  for (int i = 0; i < length; ++i) edges.push_back(make_edge(i, i + 1, 1.0));
  return TreeSpec(1, length + 1, std::move(edges));
}

Net one_dim_net() {
  Net net;
  net.dimension = 1;
  net.epsilon = 0.0;
  net.points.push_back(VecN::Constant(1, 1.0));
  net.points.push_back(VecN::Constant(1, -1.0));
  return net;
}

}  // namespace

TEST_CASE("tree validation") {
  CHECK_THROWS_AS(TreeSpec(1, 3, {make_edge(0, 1, 1.0)}), std::invalid_argument);  // |V| != |E|+1
  CHECK_THROWS_AS(TreeSpec(1, 3, {make_edge(0, 2, 1.0), make_edge(1, 2, 1.0)}),
                  std::invalid_argument);  // two parents
  CHECK_THROWS_AS(TreeSpec(1, 2, {make_edge(0, 1, 1.5)}), std::invalid_argument);  // norm > 1
  CHECK_THROWS_AS(TreeSpec(1, 4, {make_edge(0, 1, 1.0), make_edge(2, 3, 1.0),
                                  make_edge(3, 2, 1.0)}),
                  std::invalid_argument);  // cycle / extra root

  const TreeSpec path = unit_path(3);
  CHECK(path.root() == 0);
  CHECK(path.depth(3) == 3);
  CHECK(path.subtree_size(0) == 4);
  CHECK(path.subtree_size(3) == 1);
  CHECK(path.min_leaf_depth() == 3);
  CHECK(path.path_edges(2) == std::vector<int>{0, 1});
}

TEST_CASE("tree text round trip") {
  RandomStream stream(5, 0);
  const TreeSpec tree = random_tree_1d(20, stream);
  std::stringstream buffer;
  tree.write_text(buffer);
  const TreeSpec back = TreeSpec::read_text(buffer);
  REQUIRE(back.edge_count() == tree.edge_count());
  CHECK(back.dimension() == 1);
  for (int e = 0; e < tree.edge_count(); ++e) {
    CHECK(back.edge(e).parent == tree.edge(e).parent);
    CHECK(back.edge(e).child == tree.edge(e).child);
    CHECK(back.edge(e).vector == tree.edge(e).vector);
  }
}

TEST_CASE("net tree fan-out") {
  const TreeSpec tree = net_tree(one_dim_net(), 3);
  CHECK(tree.edge_count() == 2 + 4 + 8);
  CHECK(tree.node_count() == 15);
  CHECK(tree.min_leaf_depth() == 3);
  for (int e : tree.child_edges(tree.root())) {
    const double v = tree.edge(e).vector[0];
    CHECK(std::abs(std::abs(v) - 1.0) <= 1e-15);
  }
}

TEST_CASE("balance on the two-edge unit path") {
  const TreeSpec path = unit_path(2);
  const Interval K = Interval::of(-1.1503494, 1.1503494);  // measure 0.75 = 1 - 1/(2|E|)
  const auto result = balance_tree_1d(path, kDefaultStarBeta, K);

  double prefix = 0.0;
  for (int e = 0; e < 2; ++e) {
    CHECK(std::abs(result.signs[static_cast<std::size_t>(e)]) == 1);
    prefix += result.signs[static_cast<std::size_t>(e)] * path.edge(e).vector[0];
    CHECK(std::abs(prefix) <= 1.1503494 / kDefaultStarBeta + 1e-12);
  }
}

TEST_CASE("balance on a single edge with the half-measure body") {
  const TreeSpec tree = unit_path(1);
  const Interval K = symmetric_interval_for_measure(0.5);
  const auto result = balance_tree_1d(tree, kDefaultStarBeta, K);
  const double prefix = result.signs[0] * 1.0;
  CHECK(std::abs(prefix) == 1.0);
  CHECK(std::abs(prefix) <= K.hi / kDefaultStarBeta + 1e-12);
  CHECK(K.hi / kDefaultStarBeta == doctest::Approx(3.371).epsilon(1e-3));
}

namespace {

void check_claims(const TreeSpec& tree, double beta, const Interval& K,
                  const BalanceResult& result) {
  const double edges = tree.edge_count();
  // every body keeps measure >= 1 - |subtree| / (2|E|)
  for (int i = 0; i < tree.node_count(); ++i) {
    const Interval& body = result.bodies[static_cast<std::size_t>(i)];
    REQUIRE_FALSE(body.is_empty);
    const double required = 1.0 - tree.subtree_size(i) / (2.0 * edges);
    CHECK(gaussian_measure(body) >= required - 1e-9);
  }
  // beta-scaled prefixes stay inside their bodies, so prefixes stay in (1/beta) K
  std::vector<double> prefix(static_cast<std::size_t>(tree.node_count()), 0.0);
  for (int i = 0; i < tree.node_count(); ++i) {
    if (i == tree.root()) continue;
    double sum = 0.0;
    for (int e : tree.path_edges(i))
      sum += result.signs[static_cast<std::size_t>(e)] * tree.edge(e).vector[0];
    prefix[static_cast<std::size_t>(i)] = sum;
    CHECK(result.bodies[static_cast<std::size_t>(i)].contains(beta * sum, 1e-12));
    CHECK(std::abs(sum) <= K.hi / beta + 1e-9);
  }
}

}  // namespace

TEST_CASE("balance claims hold on random trees") {
  RandomStream stream(31, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const int edges = 2 + static_cast<int>(stream.next_below(99));
    const TreeSpec tree = random_tree_1d(edges, stream);
    const Interval K = symmetric_interval_for_measure(1.0 - 0.5 / edges);
    const auto result = balance_tree_1d(tree, kDefaultStarBeta, K);
    check_claims(tree, kDefaultStarBeta, K, result);
  }
}

TEST_CASE("balance rejects bad preconditions") {
  const TreeSpec path = unit_path(2);
  CHECK_THROWS_AS(balance_tree_1d(path, 0.3, symmetric_interval_for_measure(0.9)),
                  std::invalid_argument);  // beta too large
  CHECK_THROWS_AS(balance_tree_1d(path, 0.2001, symmetric_interval_for_measure(0.6)),
                  std::invalid_argument);  // measure below 0.75
  CHECK_THROWS_AS(balance_tree_1d(path, 0.2001, Interval::of(0.0, 3.0)),
                  std::invalid_argument);  // not symmetric
}

TEST_CASE("cloning embeds blocks and preserves norms") {
  const TreeSpec path = unit_path(2);

  const ClonedTree trivial = clone_tree(path, 1);
  CHECK(trivial.blown.edge_count() == 2);
  CHECK(trivial.blown.dimension() == 1);

  const ClonedTree cloned = clone_tree(path, 3);
  CHECK(cloned.blown.edge_count() == 6);
  CHECK(cloned.blown.dimension() == 3);
  for (int e = 0; e < cloned.blown.edge_count(); ++e) {
    const int l = cloned.clone_index_of[static_cast<std::size_t>(e)];
    const VecN& v = cloned.blown.edge(e).vector;
    for (int i = 0; i < 3; ++i) {
      if (i == l - 1)
        CHECK(v[i] == 1.0);
      else
        CHECK(v[i] == 0.0);
    }
    const int base = cloned.base_edge_of[static_cast<std::size_t>(e)];
    CHECK(std::abs(v.norm() - path.edge(base).vector.norm()) <= 1e-15);
  }

  CHECK_THROWS_AS(clone_tree(path, 1000000), std::invalid_argument);
}

TEST_CASE("search certifies a single edge immediately") {
  const TreeSpec edge = unit_path(1);
  const auto report = search_subgaussian_distribution(edge, 1, 10.0, one_dim_net());
  REQUIRE(report.certified);
  CHECK(report.assignment_index == 0);  // lexicographic: all minus first
  CHECK(report.result.sign_for(0, 1) == -1);
  CHECK(report.worst_upper == doctest::Approx(kTwoPoint).epsilon(1e-9));
  for (const auto& cert : report.result.certificates) CHECK(cert.bracket.upper <= 10.0);
}

TEST_CASE("search at a tight threshold still certifies two clones") {
  const TreeSpec edge = unit_path(1);
  const auto report = search_subgaussian_distribution(edge, 2, 1.3, one_dim_net());
  REQUIRE(report.certified);
  CHECK(report.worst_upper <= 1.3);
  const auto dist = node_prefix_distribution(report.result, 1);
  CHECK(psi2_vector_bracket(dist, one_dim_net()).upper == doctest::Approx(kTwoPoint).epsilon(1e-9));
}

TEST_CASE("search below the attainable norm reports the best assignment") {
  const TreeSpec edge = unit_path(1);
  const auto report = search_subgaussian_distribution(edge, 1, 0.5, one_dim_net());
  CHECK_FALSE(report.certified);
  CHECK(report.worst_upper == doctest::Approx(kTwoPoint).epsilon(1e-9));
  CHECK(report.assignments_total == 2);
}

TEST_CASE("search on the two-edge path with four clones") {
  const TreeSpec path = unit_path(2);
  const auto report = search_subgaussian_distribution(path, 4, 10.0, one_dim_net());
  REQUIRE(report.certified);
  REQUIRE(report.result.certificates.size() == 3);
  for (const auto& cert : report.result.certificates) CHECK(cert.bracket.upper <= 10.0);
}

TEST_CASE("replaying the certified signs reproduces the node distributions") {
  const TreeSpec path = unit_path(2);
  const auto report = search_subgaussian_distribution(path, 2, 2.0, one_dim_net());
  REQUIRE(report.certified);
  const auto& cert = report.result;

  for (int node = 0; node < path.node_count(); ++node) {
    const auto stored = node_prefix_distribution(cert, node);
    // independent replay: walk the path per clone
    for (int l = 1; l <= cert.clone_count; ++l) {
      double sum = 0.0;
      for (int e : path.path_edges(node)) sum += cert.sign_for(e, l) * path.edge(e).vector[0];
      CHECK(stored.atoms()[static_cast<std::size_t>(l - 1)].vector[0] == sum);
      CHECK(stored.atoms()[static_cast<std::size_t>(l - 1)].probability ==
            doctest::Approx(1.0 / cert.clone_count));
    }
  }
}

TEST_CASE("search outcome is invariant under node relabeling") {
  // same shape twice: a root with two children, one child extended by an edge
  std::vector<TreeEdge> a_edges = {make_edge(0, 1, 0.5), make_edge(0, 2, 1.0),
                                   make_edge(2, 3, -0.75)};
  const TreeSpec a(1, 4, a_edges);
  // relabeled: nodes permuted (0->2 root stays structural), edges shuffled
  std::vector<TreeEdge> b_edges = {make_edge(1, 3, -0.75), make_edge(0, 2, 0.5),
                                   make_edge(0, 1, 1.0)};
  const TreeSpec b(1, 4, b_edges);

  const auto ra = search_subgaussian_distribution(a, 2, 2.5, one_dim_net());
  const auto rb = search_subgaussian_distribution(b, 2, 2.5, one_dim_net());
  CHECK(ra.certified == rb.certified);
  CHECK(ra.assignment_index == rb.assignment_index);
  CHECK(ra.worst_upper == doctest::Approx(rb.worst_upper).epsilon(1e-12));

  std::vector<double> ua, ub;
  for (const auto& c : ra.result.certificates) ua.push_back(c.bracket.upper);
  for (const auto& c : rb.result.certificates) ub.push_back(c.bracket.upper);
  std::sort(ua.begin(), ua.end());
  std::sort(ub.begin(), ub.end());
  REQUIRE(ua.size() == ub.size());
  for (std::size_t i = 0; i < ua.size(); ++i)
    CHECK(ua[i] == doctest::Approx(ub[i]).epsilon(1e-12));
}

TEST_CASE("certificates survive at weaker thresholds") {
  const TreeSpec edge = unit_path(1);
  const auto tight = search_subgaussian_distribution(edge, 2, 1.3, one_dim_net());
  REQUIRE(tight.certified);
  const auto loose = search_subgaussian_distribution(edge, 2, 5.0, one_dim_net());
  CHECK(loose.certified);
}

TEST_CASE("parallel search matches the sequential result") {
  const TreeSpec path = unit_path(2);
  SearchOptions seq;
  SearchOptions par;
  par.jobs = 4;
  const auto a = search_subgaussian_distribution(path, 2, 2.0, one_dim_net(), seq);
  const auto b = search_subgaussian_distribution(path, 2, 2.0, one_dim_net(), par);
  CHECK(a.certified == b.certified);
  CHECK(a.assignment_index == b.assignment_index);
  CHECK(a.result.signs == b.result.signs);
}

TEST_CASE("search space cap") {
  const TreeSpec path = unit_path(2);
  SearchOptions opts;
  opts.max_assignments = 8;  // 2^(2*2) = 16 > 8
  CHECK_THROWS_AS(search_subgaussian_distribution(path, 2, 10.0, one_dim_net(), opts),
                  std::invalid_argument);
}

TEST_CASE("certificate csv round trip") {
  const TreeSpec path = unit_path(2);
  const auto report = search_subgaussian_distribution(path, 2, 2.0, one_dim_net());
  REQUIRE(report.certified);

  std::stringstream buffer;
  report.result.write_csv(buffer);
  const auto back = CertifiedDistribution::read_csv(buffer);
  CHECK(back.clone_count == report.result.clone_count);
  CHECK(back.threshold == report.result.threshold);
  CHECK(back.signs == report.result.signs);
  CHECK(back.edge_order == report.result.edge_order);
  REQUIRE(back.certificates.size() == report.result.certificates.size());
  for (std::size_t i = 0; i < back.certificates.size(); ++i) {
    CHECK(back.certificates[i].node == report.result.certificates[i].node);
    CHECK(back.certificates[i].bracket.upper ==
          doctest::Approx(report.result.certificates[i].bracket.upper).epsilon(1e-15));
  }
  for (int node = 0; node < path.node_count(); ++node) {
    const auto da = node_prefix_distribution(report.result, node);
    const auto db = node_prefix_distribution(back, node);
    for (std::size_t l = 0; l < da.atoms().size(); ++l)
      CHECK(da.atoms()[l].vector == db.atoms()[l].vector);
  }
}
