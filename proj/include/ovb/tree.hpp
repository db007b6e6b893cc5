#pragma once

#include "ovb/core.hpp"
#include "ovb/gauss1d.hpp"
#include "ovb/nets.hpp"
#include "ovb/psi2.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace ovb {

struct TreeEdge {
  int parent = -1;
  int child = -1;
  VecN vector;
};

/// Rooted tree whose edges carry vectors of Euclidean norm at most 1.
/// Node ids are 0..node_count-1; the root is the unique node that is not
/// any edge's child.
class TreeSpec {
 public:
  /// Empty placeholder; every real tree comes from the validating constructor.
  TreeSpec() = default;
  TreeSpec(int dimension, int node_count, std::vector<TreeEdge> edges);

  int dimension() const { return dimension_; }
  int node_count() const { return node_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int root() const { return root_; }
  const std::vector<TreeEdge>& edges() const { return edges_; }
  const TreeEdge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }

  const std::vector<int>& child_edges(int node) const;
  /// Index of the edge ending at node, or -1 for the root.
  int parent_edge(int node) const { return parent_edge_[static_cast<std::size_t>(node)]; }
  /// Edge indices on the root -> node path, in path order.
  std::vector<int> path_edges(int node) const;
  /// Number of nodes in the subtree rooted at node (including itself).
  int subtree_size(int node) const { return subtree_size_[static_cast<std::size_t>(node)]; }
  int depth(int node) const;
  bool is_leaf(int node) const { return child_edges(node).empty(); }
  /// Smallest root-to-leaf depth; the longest input an online walk supports.
  int min_leaf_depth() const;

  /// Line format: header "n |V| |E|", then one edge per line
  /// "parent child v_1 ... v_n".
  void write_text(std::ostream& out) const;
  static TreeSpec read_text(std::istream& in);

 private:
  int dimension_ = 0;
  int node_count_ = 0;
  int root_ = -1;
  std::vector<TreeEdge> edges_;
  std::vector<std::vector<int>> children_;  // edge indices per node
  std::vector<int> parent_edge_;
  std::vector<int> subtree_size_;
};

/// Random recursive tree in dimension 1: node i attaches to a uniform
/// earlier node, edge scalars uniform in [-1, 1].
TreeSpec random_tree_1d(int edge_count, RandomStream& stream);

/// Complete tree of the given depth in which every interior node has one
/// child edge per net point, labelled with that point.
TreeSpec net_tree(const Net& net, int depth);

/// Edge indices in a canonical order that depends only on the shape and
/// edge vectors (parents before descendants); node relabelings map to the
/// same order.
std::vector<int> canonical_edge_order(const TreeSpec& tree);

struct BalanceResult {
  std::vector<int> signs;        // per edge index, +1 or -1
  std::vector<Interval> bodies;  // per node id
};

/// One-dimensional tree balancing: bodies built bottom-up through star and
/// intersection, signs chosen top-down so the scaled prefix stays inside
/// each body. Requires a symmetric K with Gaussian measure >= 1 - 1/(2|E|)
/// and 0 < beta <= 0.2001.
BalanceResult balance_tree_1d(const TreeSpec& tree, double beta, const Interval& K);

/// Tree with every base edge replaced by a path of clone_count edges; clone
/// l of base edge e carries the base vector embedded in block l of
/// dimension clone_count * n.
struct ClonedTree {
  TreeSpec blown;                       // the blown-up tree
  int clone_count = 1;
  std::vector<int> base_edge_of;        // blown edge -> base edge index
  std::vector<int> clone_index_of;      // blown edge -> clone index in [1, N]
  std::vector<int> blown_node_of_base;  // base node -> blown node id
};

ClonedTree clone_tree(const TreeSpec& tree, int clone_count,
                      std::int64_t max_cloned_edges = 1000000);

/// Per-node certificate: the distribution over clone blocks of the prefix
/// sum at this node, with its bracket.
struct NodeCertificate {
  int node = -1;
  Psi2Bracket bracket;
};

/// Distribution over sign assignments of a base tree, encoded by one sign
/// per (base edge, clone index), together with per-node brackets proving
/// every root-path prefix distribution sits below the threshold.
struct CertifiedDistribution {
  TreeSpec base;
  int clone_count = 1;
  double threshold = 0.0;
  /// Signs indexed canonical_base_edge_position * clone_count + (l - 1).
  std::vector<int> signs;
  /// Base edge index at each canonical position.
  std::vector<int> edge_order;
  std::vector<NodeCertificate> certificates;

  int sign_for(int base_edge, int clone) const;

  void write_csv(std::ostream& out) const;
  static CertifiedDistribution read_csv(std::istream& in);
};

/// Prefix-sum distribution at a node when the clone index is drawn
/// uniformly: atom l is the block-l signed sum along the root path.
FiniteVectorDistribution node_prefix_distribution(const CertifiedDistribution& cert, int node);

struct SearchOptions {
  std::uint64_t max_assignments = 1ull << 24;
  double tol = 1e-10;
  int jobs = 1;
};

struct SearchReport {
  bool certified = false;
  CertifiedDistribution result;
  double worst_upper = 0.0;
  std::uint64_t assignment_index = 0;
  std::uint64_t assignments_total = 0;
};

/// Exhaustive search over sign assignments of the cloned tree, in
/// lexicographic order with -1 before +1, for one whose every node
/// certificate upper bound is at most the threshold. Falls back to the
/// assignment minimizing the worst node upper bound.
SearchReport search_subgaussian_distribution(const TreeSpec& tree, int clone_count,
                                             double threshold, const Net& net,
                                             const SearchOptions& options = {});

}  // namespace ovb
