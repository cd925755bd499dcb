#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace spc {

using Node = std::size_t;
// Always kept sorted ascending and duplicate free.
using NodeSet = std::vector<Node>;

enum class EdgeMark : std::uint8_t { kNone, kUndirected, kForward, kBackward };

struct Edge {
  Node from;
  Node to;
  bool directed;

  friend bool operator==(const Edge&, const Edge&) = default;
};

class MixedGraph;

// Directed acyclic graph. Only build_dag() and the Dag(n) empty
// constructor create instances, so acyclicity always holds.
class Dag {
 public:
  explicit Dag(std::size_t num_nodes = 0);

  std::size_t num_nodes() const { return parents_.size(); }
  std::size_t num_edges() const;

  const NodeSet& parents(Node v) const;
  const NodeSet& children(Node v) const;
  bool has_edge(Node from, Node to) const;
  bool adjacent(Node a, Node b) const { return has_edge(a, b) || has_edge(b, a); }

  // Ordered pairs sorted by (from, to).
  std::vector<std::pair<Node, Node>> edges() const;

  // Reflexive: v is in its own descendant/ancestor set.
  std::vector<bool> descendants(Node v) const;
  std::vector<bool> ancestors_of(const NodeSet& nodes) const;

  MixedGraph to_mixed() const;

  friend bool operator==(const Dag&, const Dag&) = default;

 private:
  friend Dag build_dag(std::size_t, const std::vector<std::pair<Node, Node>>&);

  std::vector<NodeSet> parents_;
  std::vector<NodeSet> children_;
};

// Graph with at most one mark per unordered pair: none, undirected, or one
// of the two directions. Bidirected edges cannot be represented.
class MixedGraph {
 public:
  explicit MixedGraph(std::size_t num_nodes = 0);

  static MixedGraph complete(std::size_t num_nodes);

  std::size_t num_nodes() const { return n_; }
  std::size_t num_edges() const;

  // Mark of the pair as seen from a: kForward means a -> b.
  EdgeMark mark(Node a, Node b) const;
  bool adjacent(Node a, Node b) const { return arrow(a, b) || arrow(b, a); }
  bool is_directed(Node from, Node to) const { return arrow(from, to) && !arrow(to, from); }
  bool is_undirected(Node a, Node b) const { return arrow(a, b) && arrow(b, a); }

  void set_undirected(Node a, Node b);
  void set_directed(Node from, Node to);
  void remove_edge(Node a, Node b);

  NodeSet neighbors(Node v) const;
  NodeSet parents(Node v) const;
  NodeSet children(Node v) const;
  NodeSet undirected_neighbors(Node v) const;

  // True if a directed path from -> ... -> to exists using directed edges only.
  bool has_directed_path(Node from, Node to) const;
  bool directed_part_acyclic() const;

  MixedGraph skeleton() const;
  // Sorted by (min, max) endpoint; undirected edges reported with from < to.
  std::vector<Edge> edges() const;

  MixedGraph relabeled(const std::vector<Node>& perm) const;

  friend bool operator==(const MixedGraph&, const MixedGraph&) = default;

 private:
  bool arrow(Node a, Node b) const { return amat_[a * n_ + b] != 0; }
  void check(Node a, Node b) const;

  std::size_t n_ = 0;
  // amat_[a*n+b] set means there is an edge endpoint from a towards b;
  // both directions set encodes an undirected edge.
  std::vector<std::uint8_t> amat_;
};

struct UnshieldedTriple {
  Node i;
  Node j;  // middle
  Node k;

  friend bool operator==(const UnshieldedTriple&, const UnshieldedTriple&) = default;
};

Dag build_dag(std::size_t num_nodes, const std::vector<std::pair<Node, Node>>& edges);

// Kahn's algorithm, always releasing the smallest ready index first.
std::vector<Node> topological_order(const Dag& g);

// Exact d-separation by reachability (Bayes ball).
bool d_separated(const Dag& g, Node i, Node j, const NodeSet& conditioning);

// Unshielded triples of the skeleton of g, sorted by (j, i, k), i < k.
std::vector<UnshieldedTriple> unshielded_triples(const MixedGraph& g);

// Orients from -> to unless the pair is already to -> from or the
// orientation closes a directed cycle. Leaves g untouched on false.
bool orient_if_safe(MixedGraph& g, Node from, Node to);

// Meek rules R1-R3 until fixpoint, in snapshot rounds so the result is
// equivariant under relabeling even for PDAGs that are not patterns.
MixedGraph meek_closure(MixedGraph g);

MixedGraph dag_to_cpdag(const Dag& g);

// Edge-list text format: "nodes N" header then one "i j ->" or "i j --"
// line per edge.
void write_edge_list(std::ostream& out, const MixedGraph& g);
MixedGraph read_edge_list(std::istream& in);
void save_graph(const std::string& path, const MixedGraph& g);
MixedGraph load_graph(const std::string& path);

// Fails with kCycle/kInvalidArgument if g has undirected edges or cycles.
Dag to_dag(const MixedGraph& g);

NodeSet make_node_set(std::vector<Node> nodes);

}  // namespace spc
