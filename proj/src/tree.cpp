#include "ovb/tree.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ovb {

TreeSpec::TreeSpec(int dimension, int node_count, std::vector<TreeEdge> edges)
    : dimension_(dimension), node_count_(node_count), edges_(std::move(edges)) {
  if (dimension_ < 1) throw std::invalid_argument("tree: dimension must be >= 1");
  if (edges_.empty()) throw std::invalid_argument("tree: needs at least one edge");
  if (node_count_ != static_cast<int>(edges_.size()) + 1)
    throw std::invalid_argument("tree: |V| must equal |E| + 1");

  children_.assign(static_cast<std::size_t>(node_count_), {});
  parent_edge_.assign(static_cast<std::size_t>(node_count_), -1);
  for (int e = 0; e < edge_count(); ++e) {
    const TreeEdge& edge = edges_[static_cast<std::size_t>(e)];
    if (edge.parent < 0 || edge.parent >= node_count_ || edge.child < 0 ||
        edge.child >= node_count_ || edge.parent == edge.child)
      throw std::invalid_argument("tree: edge endpoints out of range");
    if (edge.vector.size() != dimension_)
      throw std::invalid_argument("tree: edge vector dimension mismatch");
    if (!edge.vector.allFinite() || edge.vector.norm() > 1.0 + 1e-12)
      throw std::invalid_argument("tree: edge vector must have norm <= 1");
    if (parent_edge_[static_cast<std::size_t>(edge.child)] != -1)
      throw std::invalid_argument("tree: node has two parents");
    parent_edge_[static_cast<std::size_t>(edge.child)] = e;
    children_[static_cast<std::size_t>(edge.parent)].push_back(e);
  }

  for (int i = 0; i < node_count_; ++i) {
    if (parent_edge_[static_cast<std::size_t>(i)] == -1) {
      if (root_ != -1) throw std::invalid_argument("tree: multiple roots");
      root_ = i;
    }
  }
  if (root_ == -1) throw std::invalid_argument("tree: no root (cycle)");

  // Reachability from the root; with |E| = |V| - 1 this rules out cycles.
  std::vector<char> seen(static_cast<std::size_t>(node_count_), 0);
  std::queue<int> frontier;
  frontier.push(root_);
  seen[static_cast<std::size_t>(root_)] = 1;
  int visited = 1;
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(node_count_));
  order.push_back(root_);
  while (!frontier.empty()) {
    const int i = frontier.front();
    frontier.pop();
    for (int e : children_[static_cast<std::size_t>(i)]) {
      const int c = edges_[static_cast<std::size_t>(e)].child;
      if (!seen[static_cast<std::size_t>(c)]) {
        seen[static_cast<std::size_t>(c)] = 1;
        ++visited;
        order.push_back(c);
        frontier.push(c);
      }
    }
  }
  if (visited != node_count_) throw std::invalid_argument("tree: not connected");

  subtree_size_.assign(static_cast<std::size_t>(node_count_), 1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int e = parent_edge_[static_cast<std::size_t>(*it)];
    if (e >= 0)
      subtree_size_[static_cast<std::size_t>(edges_[static_cast<std::size_t>(e)].parent)] +=
          subtree_size_[static_cast<std::size_t>(*it)];
  }
}

const std::vector<int>& TreeSpec::child_edges(int node) const {
  return children_[static_cast<std::size_t>(node)];
}

std::vector<int> TreeSpec::path_edges(int node) const {
  std::vector<int> path;
  int cur = node;
  while (cur != root_) {
    const int e = parent_edge_[static_cast<std::size_t>(cur)];
    path.push_back(e);
    cur = edges_[static_cast<std::size_t>(e)].parent;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

int TreeSpec::depth(int node) const {
  int d = 0;
  int cur = node;
  while (cur != root_) {
    cur = edges_[static_cast<std::size_t>(parent_edge_[static_cast<std::size_t>(cur)])].parent;
    ++d;
  }
  return d;
}

int TreeSpec::min_leaf_depth() const {
  int best = node_count_;
  for (int i = 0; i < node_count_; ++i)
    if (is_leaf(i)) best = std::min(best, depth(i));
  return best;
}

void TreeSpec::write_text(std::ostream& out) const {
  out << dimension_ << " " << node_count_ << " " << edge_count() << "\n";
  for (const auto& e : edges_) {
    out << e.parent << " " << e.child;
    for (int i = 0; i < dimension_; ++i) out << " " << format_double(e.vector[i]);
    out << "\n";
  }
}

TreeSpec TreeSpec::read_text(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    break;
  }
  std::istringstream header(line);
  int n = 0, nodes = 0, edge_count = 0;
  if (!(header >> n >> nodes >> edge_count))
    throw std::runtime_error("tree text: malformed header");
  std::vector<TreeEdge> edges;
  edges.reserve(static_cast<std::size_t>(edge_count));
  for (int e = 0; e < edge_count; ++e) {
    if (!std::getline(in, line)) throw std::runtime_error("tree text: missing edge line");
    if (line.empty() || line[0] == '#') {
      --e;
      continue;
    }
    std::istringstream row(line);
    TreeEdge edge;
    edge.vector = VecN(n);
    if (!(row >> edge.parent >> edge.child))
      throw std::runtime_error("tree text: malformed edge line");
    for (int i = 0; i < n; ++i)
      if (!(row >> edge.vector[i])) throw std::runtime_error("tree text: short edge vector");
    edges.push_back(std::move(edge));
  }
  return TreeSpec(n, nodes, std::move(edges));
}

TreeSpec random_tree_1d(int edge_count, RandomStream& stream) {
  if (edge_count < 1) throw std::invalid_argument("random_tree_1d: need at least one edge");
  std::vector<TreeEdge> edges;
  edges.reserve(static_cast<std::size_t>(edge_count));
  for (int i = 1; i <= edge_count; ++i) {
    TreeEdge e;
    e.parent = static_cast<int>(stream.next_below(static_cast<std::uint64_t>(i)));
    e.child = i;
    e.vector = VecN::Constant(1, 2.0 * stream.next_unit() - 1.0);
    edges.push_back(std::move(e));
  }
  return TreeSpec(1, edge_count + 1, std::move(edges));
}

TreeSpec net_tree(const Net& net, int depth) {
  if (depth < 1) throw std::invalid_argument("net_tree: depth must be >= 1");
  std::vector<TreeEdge> edges;
  std::vector<int> frontier = {0};
  int next_id = 1;
  for (int level = 0; level < depth; ++level) {
    std::vector<int> next_frontier;
    for (int node : frontier) {
      for (const auto& w : net.points) {
        TreeEdge e;
        e.parent = node;
        e.child = next_id++;
        e.vector = w;
        edges.push_back(std::move(e));
        next_frontier.push_back(next_id - 1);
      }
    }
    frontier = std::move(next_frontier);
  }
  return TreeSpec(net.dimension, next_id, std::move(edges));
}

namespace {

// Relabel-invariant byte key for an edge vector.
std::string vector_key(const VecN& v) {
  std::string key;
  key.reserve(static_cast<std::size_t>(v.size()) * 8);
  for (int i = 0; i < v.size(); ++i) {
    std::uint64_t bits = 0;
    const double x = v[i];
    std::memcpy(&bits, &x, sizeof(bits));
    for (int b = 7; b >= 0; --b) key.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
  }
  return key;
}

std::string subtree_signature(const TreeSpec& tree, int node,
                              std::vector<std::pair<std::string, int>>* sorted_children) {
  std::vector<std::pair<std::string, int>> keyed;
  for (int e : tree.child_edges(node)) {
    const TreeEdge& edge = tree.edge(e);
    std::string key = vector_key(edge.vector);
    key += subtree_signature(tree, edge.child, nullptr);
    keyed.emplace_back(std::move(key), e);
  }
  std::sort(keyed.begin(), keyed.end());
  std::string sig = "(";
  for (const auto& [key, e] : keyed) sig += key;
  sig += ")";
  if (sorted_children) *sorted_children = std::move(keyed);
  return sig;
}

void canonical_dfs(const TreeSpec& tree, int node, std::vector<int>& order) {
  std::vector<std::pair<std::string, int>> keyed;
  subtree_signature(tree, node, &keyed);
  for (const auto& [key, e] : keyed) {
    order.push_back(e);
    canonical_dfs(tree, tree.edge(e).child, order);
  }
}

}  // namespace

std::vector<int> canonical_edge_order(const TreeSpec& tree) {
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(tree.edge_count()));
  canonical_dfs(tree, tree.root(), order);
  return order;
}

BalanceResult balance_tree_1d(const TreeSpec& tree, double beta, const Interval& K) {
  if (tree.dimension() != 1) throw std::invalid_argument("balance_tree_1d: dimension must be 1");
  if (!(beta > 0.0 && beta <= kDefaultStarBeta))
    throw std::invalid_argument("balance_tree_1d: beta must lie in (0, 0.2001]");
  if (K.is_empty || !K.symmetric(1e-9))
    throw std::invalid_argument("balance_tree_1d: K must be symmetric and non-empty");
  const double required = 1.0 - 0.5 / static_cast<double>(tree.edge_count());
  if (gaussian_measure(K) < required - 1e-12)
    throw std::invalid_argument("balance_tree_1d: K measure below 1 - 1/(2|E|)");

  const int nodes = tree.node_count();
  std::vector<Interval> bodies(static_cast<std::size_t>(nodes), Interval::empty());

  // Bottom-up pass in reverse BFS order: children before parents.
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(nodes));
  order.push_back(tree.root());
  for (std::size_t k = 0; k < order.size(); ++k)
    for (int e : tree.child_edges(order[k])) order.push_back(tree.edge(e).child);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Interval body = K;
    for (int e : tree.child_edges(*it)) {
      const TreeEdge& edge = tree.edge(e);
      const Interval starred =
          star_1d(bodies[static_cast<std::size_t>(edge.child)], beta * edge.vector[0]);
      body = intersect(body, starred);
    }
    if (body.is_empty)
      throw std::logic_error("balance_tree_1d: body collapsed; preconditions violated");
    bodies[static_cast<std::size_t>(*it)] = body;
  }

  // Top-down greedy signs: keep beta times the prefix inside each body.
  std::vector<int> signs(static_cast<std::size_t>(tree.edge_count()), 0);
  std::vector<double> scaled_prefix(static_cast<std::size_t>(nodes), 0.0);
  for (int node : order) {
    const double a = scaled_prefix[static_cast<std::size_t>(node)];
    for (int e : tree.child_edges(node)) {
      const TreeEdge& edge = tree.edge(e);
      const double step = beta * edge.vector[0];
      const Interval& target = bodies[static_cast<std::size_t>(edge.child)];
      int sign = 0;
      if (target.contains(a + step, 1e-12))
        sign = +1;
      else if (target.contains(a - step, 1e-12))
        sign = -1;
      else
        throw std::logic_error("balance_tree_1d: no feasible sign; invariant breach");
      signs[static_cast<std::size_t>(e)] = sign;
      scaled_prefix[static_cast<std::size_t>(edge.child)] = a + sign * step;
    }
  }

  return BalanceResult{std::move(signs), std::move(bodies)};
}

ClonedTree clone_tree(const TreeSpec& tree, int clone_count, std::int64_t max_cloned_edges) {
  if (clone_count < 1) throw std::invalid_argument("clone_tree: clone count must be >= 1");
  const std::int64_t total =
      static_cast<std::int64_t>(clone_count) * static_cast<std::int64_t>(tree.edge_count());
  if (total > max_cloned_edges)
    throw std::invalid_argument("clone_tree: cloned edge count exceeds cap");

  const int n = tree.dimension();
  const int blown_dim = clone_count * n;
  ClonedTree out;
  out.clone_count = clone_count;
  out.blown_node_of_base.resize(static_cast<std::size_t>(tree.node_count()));
  for (int i = 0; i < tree.node_count(); ++i) out.blown_node_of_base[static_cast<std::size_t>(i)] = i;

  std::vector<TreeEdge> edges;
  edges.reserve(static_cast<std::size_t>(total));
  int next_id = tree.node_count();
  for (int e = 0; e < tree.edge_count(); ++e) {
    const TreeEdge& base = tree.edge(e);
    int from = base.parent;
    for (int l = 1; l <= clone_count; ++l) {
      const int to = (l == clone_count) ? base.child : next_id++;
      TreeEdge clone;
      clone.parent = from;
      clone.child = to;
      clone.vector = VecN::Zero(blown_dim);
      clone.vector.segment(static_cast<Eigen::Index>(l - 1) * n, n) = base.vector;
      edges.push_back(std::move(clone));
      out.base_edge_of.push_back(e);
      out.clone_index_of.push_back(l);
      from = to;
    }
  }
  out.blown = TreeSpec(blown_dim, next_id, std::move(edges));
  return out;
}

int CertifiedDistribution::sign_for(int base_edge, int clone) const {
  for (std::size_t pos = 0; pos < edge_order.size(); ++pos) {
    if (edge_order[pos] == base_edge)
      return signs[pos * static_cast<std::size_t>(clone_count) +
                   static_cast<std::size_t>(clone - 1)];
  }
  throw std::out_of_range("sign_for: unknown edge");
}

FiniteVectorDistribution node_prefix_distribution(const CertifiedDistribution& cert, int node) {
  const auto path = cert.base.path_edges(node);
  std::vector<VecN> atoms;
  atoms.reserve(static_cast<std::size_t>(cert.clone_count));
  for (int l = 1; l <= cert.clone_count; ++l) {
    VecN sum = VecN::Zero(cert.base.dimension());
    for (int e : path) sum += static_cast<double>(cert.sign_for(e, l)) * cert.base.edge(e).vector;
    atoms.push_back(std::move(sum));
  }
  return FiniteVectorDistribution::uniform(atoms);
}

void CertifiedDistribution::write_csv(std::ostream& out) const {
  out << "record,i,j,key,value\n";
  out << "meta,,,version," << kVersion << "\n";
  out << "meta,,,dimension," << base.dimension() << "\n";
  out << "meta,,,node_count," << base.node_count() << "\n";
  out << "meta,,,edge_count," << base.edge_count() << "\n";
  out << "meta,,,clone_count," << clone_count << "\n";
  out << "meta,,,threshold," << format_double(threshold) << "\n";
  for (const auto& e : base.edges()) {
    out << "tree," << e.parent << "," << e.child << ",,";
    for (int i = 0; i < base.dimension(); ++i)
      out << (i > 0 ? " " : "") << format_double(e.vector[i]);
    out << "\n";
  }
  for (std::size_t pos = 0; pos < edge_order.size(); ++pos)
    for (int l = 1; l <= clone_count; ++l)
      out << "sign," << l << "," << edge_order[pos] << ",,"
          << signs[pos * static_cast<std::size_t>(clone_count) + static_cast<std::size_t>(l - 1)]
          << "\n";
  for (const auto& c : certificates)
    out << "cert," << c.node << ",,," << format_double(c.bracket.lower) << " "
        << format_double(c.bracket.upper) << " " << format_double(c.bracket.net_epsilon) << "\n";
}

CertifiedDistribution CertifiedDistribution::read_csv(std::istream& in) {
  std::string line;
  int dimension = 0, node_count = 0, edge_count = 0, clone_count = 1;
  double threshold = 0.0;
  std::vector<TreeEdge> edges;
  std::vector<int> signs;
  std::vector<int> edge_order;
  std::vector<NodeCertificate> certificates;
  bool header_seen = false;

  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    f.resize(5);
    const std::string& record = f[0];
    if (record == "meta") {
      if (f[3] == "dimension") dimension = std::stoi(f[4]);
      else if (f[3] == "node_count") node_count = std::stoi(f[4]);
      else if (f[3] == "edge_count") edge_count = std::stoi(f[4]);
      else if (f[3] == "clone_count") clone_count = std::stoi(f[4]);
      else if (f[3] == "threshold") threshold = std::stod(f[4]);
    } else if (record == "tree") {
      TreeEdge e;
      e.parent = std::stoi(f[1]);
      e.child = std::stoi(f[2]);
      e.vector = VecN(dimension);
      std::istringstream coords(f[4]);
      for (int i = 0; i < dimension; ++i) coords >> e.vector[i];
      edges.push_back(std::move(e));
    } else if (record == "sign") {
      const int edge = std::stoi(f[2]);
      if (edge_order.empty() || edge_order.back() != edge) edge_order.push_back(edge);
      signs.push_back(std::stoi(f[4]));
    } else if (record == "cert") {
      NodeCertificate c;
      c.node = std::stoi(f[1]);
      std::istringstream vals(f[4]);
      vals >> c.bracket.lower >> c.bracket.upper >> c.bracket.net_epsilon;
      certificates.push_back(c);
    }
  }
  if (static_cast<int>(edges.size()) != edge_count)
    throw std::runtime_error("certificate csv: edge count mismatch");

  CertifiedDistribution cert;
  cert.base = TreeSpec(dimension, node_count, std::move(edges));
  cert.clone_count = clone_count;
  cert.threshold = threshold;
  cert.signs = std::move(signs);
  cert.edge_order = std::move(edge_order);
  cert.certificates = std::move(certificates);
  return cert;
}

namespace {

struct SearchContext {
  const TreeSpec* tree;
  int clone_count;
  double threshold;
  const Net* net;
  double tol;
  std::vector<int> canon;                  // canonical position -> base edge
  std::vector<int> position_of;            // base edge -> canonical position
  std::vector<std::vector<int>> node_paths;  // node -> base edge indices
  int bit_count;

  int sign_at(std::uint64_t assignment, int position, int clone) const {
    const int bit = position * clone_count + (clone - 1);
    const int shift = bit_count - 1 - bit;
    return ((assignment >> shift) & 1ull) ? 1 : -1;
  }
};

struct Evaluation {
  bool certified;
  double worst_upper;
  std::vector<NodeCertificate> certificates;
};

Evaluation evaluate_assignment(const SearchContext& ctx, std::uint64_t assignment,
                               bool collect_certificates) {
  Evaluation ev{true, 0.0, {}};
  const int n = ctx.tree->dimension();
  for (int node = 0; node < ctx.tree->node_count(); ++node) {
    std::vector<VecN> atoms;
    atoms.reserve(static_cast<std::size_t>(ctx.clone_count));
    for (int l = 1; l <= ctx.clone_count; ++l) {
      VecN sum = VecN::Zero(n);
      for (int e : ctx.node_paths[static_cast<std::size_t>(node)])
        sum += static_cast<double>(
                   ctx.sign_at(assignment, ctx.position_of[static_cast<std::size_t>(e)], l)) *
               ctx.tree->edge(e).vector;
      atoms.push_back(std::move(sum));
    }
    const auto bracket =
        psi2_vector_bracket(FiniteVectorDistribution::uniform(atoms), *ctx.net, ctx.tol);
    ev.worst_upper = std::max(ev.worst_upper, bracket.upper);
    if (bracket.upper > ctx.threshold) ev.certified = false;
    if (collect_certificates) ev.certificates.push_back({node, bracket});
  }
  return ev;
}

struct WorkerResult {
  std::uint64_t first_success = UINT64_MAX;
  std::uint64_t best_index = UINT64_MAX;
  double best_worst = std::numeric_limits<double>::infinity();
};

}  // namespace

SearchReport search_subgaussian_distribution(const TreeSpec& tree, int clone_count,
                                             double threshold, const Net& net,
                                             const SearchOptions& options) {
  if (tree.edge_count() < 1) throw std::invalid_argument("search: empty tree");
  if (net.dimension != tree.dimension())
    throw std::invalid_argument("search: net dimension mismatch");
  if (clone_count < 1) throw std::invalid_argument("search: clone count must be >= 1");
  const int bits = clone_count * tree.edge_count();
  if (bits >= 63 || (1ull << bits) > options.max_assignments)
    throw std::invalid_argument("search: assignment space exceeds cap");

  SearchContext ctx;
  ctx.tree = &tree;
  ctx.clone_count = clone_count;
  ctx.threshold = threshold;
  ctx.net = &net;
  ctx.tol = options.tol;
  ctx.canon = canonical_edge_order(tree);
  ctx.position_of.assign(static_cast<std::size_t>(tree.edge_count()), -1);
  for (std::size_t pos = 0; pos < ctx.canon.size(); ++pos)
    ctx.position_of[static_cast<std::size_t>(ctx.canon[pos])] = static_cast<int>(pos);
  ctx.node_paths.resize(static_cast<std::size_t>(tree.node_count()));
  for (int i = 0; i < tree.node_count(); ++i)
    ctx.node_paths[static_cast<std::size_t>(i)] = tree.path_edges(i);
  ctx.bit_count = bits;

  const std::uint64_t total = 1ull << bits;
  const int jobs = std::max(1, options.jobs);
  std::atomic<std::uint64_t> earliest_success{UINT64_MAX};
  std::vector<WorkerResult> results(static_cast<std::size_t>(jobs));

  auto scan = [&](int worker) {
    const std::uint64_t begin = total * static_cast<std::uint64_t>(worker) /
                                static_cast<std::uint64_t>(jobs);
    const std::uint64_t end = total * static_cast<std::uint64_t>(worker + 1) /
                              static_cast<std::uint64_t>(jobs);
    WorkerResult& res = results[static_cast<std::size_t>(worker)];
    for (std::uint64_t a = begin; a < end; ++a) {
      if (a >= earliest_success.load(std::memory_order_relaxed)) break;
      const auto ev = evaluate_assignment(ctx, a, false);
      if (ev.worst_upper < res.best_worst) {
        res.best_worst = ev.worst_upper;
        res.best_index = a;
      }
      if (ev.certified) {
        res.first_success = a;
        std::uint64_t expected = earliest_success.load(std::memory_order_relaxed);
        while (a < expected &&
               !earliest_success.compare_exchange_weak(expected, a, std::memory_order_relaxed)) {
        }
        break;
      }
    }
  };

  if (jobs == 1) {
    scan(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w) pool.emplace_back(scan, w);
    for (auto& t : pool) t.join();
  }

  std::uint64_t winner = UINT64_MAX;
  for (const auto& r : results) winner = std::min(winner, r.first_success);

  SearchReport report;
  report.assignments_total = total;
  if (winner != UINT64_MAX) {
    report.certified = true;
    report.assignment_index = winner;
  } else {
    double best_worst = std::numeric_limits<double>::infinity();
    std::uint64_t best_index = UINT64_MAX;
    for (const auto& r : results) {
      if (r.best_worst < best_worst ||
          (r.best_worst == best_worst && r.best_index < best_index)) {
        best_worst = r.best_worst;
        best_index = r.best_index;
      }
    }
    report.assignment_index = best_index;
  }

  const auto ev = evaluate_assignment(ctx, report.assignment_index, true);
  report.worst_upper = ev.worst_upper;
  report.result.base = tree;
  report.result.clone_count = clone_count;
  report.result.threshold = threshold;
  report.result.edge_order = ctx.canon;
  report.result.certificates = ev.certificates;
  report.result.signs.resize(static_cast<std::size_t>(bits));
  for (std::size_t pos = 0; pos < ctx.canon.size(); ++pos)
    for (int l = 1; l <= clone_count; ++l)
      report.result.signs[pos * static_cast<std::size_t>(clone_count) +
                          static_cast<std::size_t>(l - 1)] =
          ctx.sign_at(report.assignment_index, static_cast<int>(pos), l);
  return report;
}

}  // namespace ovb
