#include "graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

#include "errors.hpp"

namespace spc {

namespace {

void check_index(std::size_t n, Node v) {
  if (v >= n) {
    throw Error(ErrorCode::kIndex,
                "node " + std::to_string(v) + " out of range for " + std::to_string(n) + " nodes");
  }
}

bool contains(const NodeSet& s, Node v) { return std::binary_search(s.begin(), s.end(), v); }

}  // namespace

NodeSet make_node_set(std::vector<Node> nodes) {
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

// ---------------------------------------------------------------------------
// Dag

Dag::Dag(std::size_t num_nodes) : parents_(num_nodes), children_(num_nodes) {}

std::size_t Dag::num_edges() const {
  std::size_t total = 0;
  for (const auto& p : parents_) total += p.size();
  return total;
}

const NodeSet& Dag::parents(Node v) const {
  check_index(num_nodes(), v);
  return parents_[v];
}

const NodeSet& Dag::children(Node v) const {
  check_index(num_nodes(), v);
  return children_[v];
}

bool Dag::has_edge(Node from, Node to) const {
  check_index(num_nodes(), from);
  check_index(num_nodes(), to);
  return contains(parents_[to], from);
}

std::vector<std::pair<Node, Node>> Dag::edges() const {
  std::vector<std::pair<Node, Node>> out;
  for (Node from = 0; from < num_nodes(); ++from) {
    for (Node to : children_[from]) out.emplace_back(from, to);
  }
  return out;
}

std::vector<bool> Dag::descendants(Node v) const {
  check_index(num_nodes(), v);
  std::vector<bool> seen(num_nodes(), false);
  std::vector<Node> stack{v};
  seen[v] = true;
  while (!stack.empty()) {
    Node u = stack.back();
    stack.pop_back();
    for (Node c : children_[u]) {
      if (!seen[c]) {
        seen[c] = true;
        stack.push_back(c);
      }
    }
  }
  return seen;
}

std::vector<bool> Dag::ancestors_of(const NodeSet& nodes) const {
  std::vector<bool> seen(num_nodes(), false);
  std::vector<Node> stack;
  for (Node v : nodes) {
    check_index(num_nodes(), v);
    if (!seen[v]) {
      seen[v] = true;
      stack.push_back(v);
    }
  }
  while (!stack.empty()) {
    Node u = stack.back();
    stack.pop_back();
    for (Node p : parents_[u]) {
      if (!seen[p]) {
        seen[p] = true;
        stack.push_back(p);
      }
    }
  }
  return seen;
}

MixedGraph Dag::to_mixed() const {
  MixedGraph g(num_nodes());
  for (const auto& [from, to] : edges()) g.set_directed(from, to);
  return g;
}

Dag build_dag(std::size_t num_nodes, const std::vector<std::pair<Node, Node>>& edges) {
  Dag g(num_nodes);
  for (const auto& [from, to] : edges) {
    check_index(num_nodes, from);
    check_index(num_nodes, to);
    if (from == to) {
      throw Error(ErrorCode::kSelfLoop, "self loop on node " + std::to_string(from));
    }
    if (contains(g.parents_[to], from)) {
      throw Error(ErrorCode::kDuplicateEdge,
                  "duplicate edge " + std::to_string(from) + " -> " + std::to_string(to));
    }
    auto& pa = g.parents_[to];
    pa.insert(std::upper_bound(pa.begin(), pa.end(), from), from);
    auto& ch = g.children_[from];
    ch.insert(std::upper_bound(ch.begin(), ch.end(), to), to);
  }
  // Kahn's algorithm detects cycles.
  std::vector<std::size_t> indegree(num_nodes);
  for (Node v = 0; v < num_nodes; ++v) indegree[v] = g.parents_[v].size();
  std::vector<Node> ready;
  for (Node v = 0; v < num_nodes; ++v) {
    if (indegree[v] == 0) ready.push_back(v);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    Node u = ready.back();
    ready.pop_back();
    ++visited;
    for (Node c : g.children_[u]) {
      if (--indegree[c] == 0) ready.push_back(c);
    }
  }
  if (visited != num_nodes) throw Error(ErrorCode::kCycle, "edges form a directed cycle");
  return g;
}

std::vector<Node> topological_order(const Dag& g) {
  const std::size_t n = g.num_nodes();
  std::vector<std::size_t> indegree(n);
  std::priority_queue<Node, std::vector<Node>, std::greater<>> ready;
  for (Node v = 0; v < n; ++v) {
    indegree[v] = g.parents(v).size();
    if (indegree[v] == 0) ready.push(v);
  }
  std::vector<Node> order;
  order.reserve(n);
  while (!ready.empty()) {
    Node u = ready.top();
    ready.pop();
    order.push_back(u);
    for (Node c : g.children(u)) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  return order;
}

bool d_separated(const Dag& g, Node i, Node j, const NodeSet& conditioning) {
  const std::size_t n = g.num_nodes();
  check_index(n, i);
  check_index(n, j);
  for (Node z : conditioning) check_index(n, z);
  if (i == j) throw Error(ErrorCode::kInvalidArgument, "d-separation of a node from itself");
  std::vector<bool> in_z(n, false);
  for (Node z : conditioning) in_z[z] = true;
  if (in_z[i] || in_z[j]) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint inside the conditioning set");
  }
  const std::vector<bool> anc_z = g.ancestors_of(conditioning);

  // Bayes ball: state (node, arrived_from_child).
  enum Dir : int { kUp = 0, kDown = 1 };
  std::vector<std::uint8_t> visited(2 * n, 0);
  std::deque<std::pair<Node, Dir>> queue{{i, kUp}};
  while (!queue.empty()) {
    auto [v, dir] = queue.front();
    queue.pop_front();
    if (visited[2 * v + dir]) continue;
    visited[2 * v + dir] = 1;
    if (v == j && !in_z[v]) return false;
    if (dir == kUp) {
      if (in_z[v]) continue;
      for (Node p : g.parents(v)) queue.emplace_back(p, kUp);
      for (Node c : g.children(v)) queue.emplace_back(c, kDown);
    } else {
      if (!in_z[v]) {
        for (Node c : g.children(v)) queue.emplace_back(c, kDown);
      }
      if (anc_z[v]) {
        for (Node p : g.parents(v)) queue.emplace_back(p, kUp);
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// MixedGraph

MixedGraph::MixedGraph(std::size_t num_nodes) : n_(num_nodes), amat_(num_nodes * num_nodes, 0) {}

MixedGraph MixedGraph::complete(std::size_t num_nodes) {
  MixedGraph g(num_nodes);
  for (Node a = 0; a < num_nodes; ++a) {
    for (Node b = 0; b < num_nodes; ++b) {
      if (a != b) g.amat_[a * num_nodes + b] = 1;
    }
  }
  return g;
}

void MixedGraph::check(Node a, Node b) const {
  check_index(n_, a);
  check_index(n_, b);
  if (a == b) throw Error(ErrorCode::kSelfLoop, "self loop on node " + std::to_string(a));
}

std::size_t MixedGraph::num_edges() const {
  std::size_t total = 0;
  for (Node a = 0; a < n_; ++a) {
    for (Node b = a + 1; b < n_; ++b) {
      if (adjacent(a, b)) ++total;
    }
  }
  return total;
}

EdgeMark MixedGraph::mark(Node a, Node b) const {
  check(a, b);
  const bool ab = arrow(a, b);
  const bool ba = arrow(b, a);
  if (ab && ba) return EdgeMark::kUndirected;
  if (ab) return EdgeMark::kForward;
  if (ba) return EdgeMark::kBackward;
  return EdgeMark::kNone;
}

void MixedGraph::set_undirected(Node a, Node b) {
  check(a, b);
  amat_[a * n_ + b] = 1;
  amat_[b * n_ + a] = 1;
}

void MixedGraph::set_directed(Node from, Node to) {
  check(from, to);
  amat_[from * n_ + to] = 1;
  amat_[to * n_ + from] = 0;
}

void MixedGraph::remove_edge(Node a, Node b) {
  check(a, b);
  amat_[a * n_ + b] = 0;
  amat_[b * n_ + a] = 0;
}

NodeSet MixedGraph::neighbors(Node v) const {
  check_index(n_, v);
  NodeSet out;
  for (Node u = 0; u < n_; ++u) {
    if (u != v && adjacent(v, u)) out.push_back(u);
  }
  return out;
}

NodeSet MixedGraph::parents(Node v) const {
  check_index(n_, v);
  NodeSet out;
  for (Node u = 0; u < n_; ++u) {
    if (u != v && is_directed(u, v)) out.push_back(u);
  }
  return out;
}

NodeSet MixedGraph::children(Node v) const {
  check_index(n_, v);
  NodeSet out;
  for (Node u = 0; u < n_; ++u) {
    if (u != v && is_directed(v, u)) out.push_back(u);
  }
  return out;
}

NodeSet MixedGraph::undirected_neighbors(Node v) const {
  check_index(n_, v);
  NodeSet out;
  for (Node u = 0; u < n_; ++u) {
    if (u != v && is_undirected(v, u)) out.push_back(u);
  }
  return out;
}

bool MixedGraph::has_directed_path(Node from, Node to) const {
  check_index(n_, from);
  check_index(n_, to);
  std::vector<bool> seen(n_, false);
  std::vector<Node> stack{from};
  seen[from] = true;
  while (!stack.empty()) {
    Node u = stack.back();
    stack.pop_back();
    for (Node w = 0; w < n_; ++w) {
      if (w == u || seen[w] || !is_directed(u, w)) continue;
      if (w == to) return true;
      seen[w] = true;
      stack.push_back(w);
    }
  }
  return false;
}

bool MixedGraph::directed_part_acyclic() const {
  std::vector<std::size_t> indegree(n_, 0);
  for (Node a = 0; a < n_; ++a) {
    for (Node b = 0; b < n_; ++b) {
      if (a != b && is_directed(a, b)) ++indegree[b];
    }
  }
  std::vector<Node> ready;
  for (Node v = 0; v < n_; ++v) {
    if (indegree[v] == 0) ready.push_back(v);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    Node u = ready.back();
    ready.pop_back();
    ++visited;
    for (Node w = 0; w < n_; ++w) {
      if (w != u && is_directed(u, w) && --indegree[w] == 0) ready.push_back(w);
    }
  }
  return visited == n_;
}

MixedGraph MixedGraph::skeleton() const {
  MixedGraph out(n_);
  for (Node a = 0; a < n_; ++a) {
    for (Node b = a + 1; b < n_; ++b) {
      if (adjacent(a, b)) out.set_undirected(a, b);
    }
  }
  return out;
}

std::vector<Edge> MixedGraph::edges() const {
  std::vector<Edge> out;
  for (Node a = 0; a < n_; ++a) {
    for (Node b = a + 1; b < n_; ++b) {
      if (is_undirected(a, b)) {
        out.push_back({a, b, false});
      } else if (is_directed(a, b)) {
        out.push_back({a, b, true});
      } else if (is_directed(b, a)) {
        out.push_back({b, a, true});
      }
    }
  }
  return out;
}

MixedGraph MixedGraph::relabeled(const std::vector<Node>& perm) const {
  if (perm.size() != n_) throw Error(ErrorCode::kInvalidArgument, "permutation size mismatch");
  MixedGraph out(n_);
  for (Node a = 0; a < n_; ++a) {
    for (Node b = 0; b < n_; ++b) {
      out.amat_[perm[a] * n_ + perm[b]] = amat_[a * n_ + b];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Algorithms on mixed graphs

std::vector<UnshieldedTriple> unshielded_triples(const MixedGraph& g) {
  std::vector<UnshieldedTriple> out;
  for (Node j = 0; j < g.num_nodes(); ++j) {
    const NodeSet adj = g.neighbors(j);
    for (std::size_t a = 0; a < adj.size(); ++a) {
      for (std::size_t b = a + 1; b < adj.size(); ++b) {
        if (!g.adjacent(adj[a], adj[b])) out.push_back({adj[a], j, adj[b]});
      }
    }
  }
  return out;
}

bool orient_if_safe(MixedGraph& g, Node from, Node to) {
  switch (g.mark(from, to)) {
    case EdgeMark::kNone:
      throw Error(ErrorCode::kNotAdjacent,
                  "no edge between " + std::to_string(from) + " and " + std::to_string(to));
    case EdgeMark::kForward:
      return true;
    case EdgeMark::kBackward:
      return false;
    case EdgeMark::kUndirected:
      break;
  }
  if (g.has_directed_path(to, from)) return false;
  g.set_directed(from, to);
  return true;
}

namespace {

// R1: a -> x, x - y, a and y non-adjacent.
bool meek_r1(const MixedGraph& g, Node x, Node y) {
  for (Node a : g.parents(x)) {
    if (a != y && !g.adjacent(a, y)) return true;
  }
  return false;
}

// R2: x -> b -> y with x - y.
bool meek_r2(const MixedGraph& g, Node x, Node y) {
  for (Node b : g.children(x)) {
    if (b != y && g.is_directed(b, y)) return true;
  }
  return false;
}

// R3: x - c, x - d, c -> y, d -> y, c and d non-adjacent.
bool meek_r3(const MixedGraph& g, Node x, Node y) {
  NodeSet candidates;
  for (Node c : g.undirected_neighbors(x)) {
    if (c != y && g.is_directed(c, y)) candidates.push_back(c);
  }
  for (std::size_t a = 0; a < candidates.size(); ++a) {
    for (std::size_t b = a + 1; b < candidates.size(); ++b) {
      if (!g.adjacent(candidates[a], candidates[b])) return true;
    }
  }
  return false;
}

}  // namespace

// Rounds over a frozen snapshot: every orientation implied by R1-R3 is
// collected first, then pairs implied both ways and arrows that would close
// a directed cycle are dropped, and the rest are applied together. Nothing
// depends on node labels, and on a pattern the fixpoint is the usual one.
MixedGraph meek_closure(MixedGraph g) {
  const std::size_t n = g.num_nodes();
  for (;;) {
    std::vector<std::pair<Node, Node>> implied;
    for (Node x = 0; x < n; ++x) {
      for (Node y = 0; y < n; ++y) {
        if (x == y || !g.is_undirected(x, y)) continue;
        if (meek_r1(g, x, y) || meek_r2(g, x, y) || meek_r3(g, x, y)) implied.emplace_back(x, y);
      }
    }
    const std::set<std::pair<Node, Node>> lookup(implied.begin(), implied.end());
    std::erase_if(implied, [&](const auto& e) { return lookup.contains({e.second, e.first}); });
    MixedGraph trial = g;
    for (auto [x, y] : implied) trial.set_directed(x, y);
    std::erase_if(implied, [&](const auto& e) { return trial.has_directed_path(e.second, e.first); });
    if (implied.empty()) break;
    for (auto [x, y] : implied) g.set_directed(x, y);
  }
  return g;
}

MixedGraph dag_to_cpdag(const Dag& dag) {
  const MixedGraph directed = dag.to_mixed();
  MixedGraph g = directed.skeleton();
  for (const auto& t : unshielded_triples(g)) {
    if (directed.is_directed(t.i, t.j) && directed.is_directed(t.k, t.j)) {
      g.set_directed(t.i, t.j);
      g.set_directed(t.k, t.j);
    }
  }
  return meek_closure(std::move(g));
}

Dag to_dag(const MixedGraph& g) {
  std::vector<std::pair<Node, Node>> edges;
  for (const auto& e : g.edges()) {
    if (!e.directed) {
      throw Error(ErrorCode::kInvalidArgument, "graph has undirected edge " +
                                                   std::to_string(e.from) + " -- " +
                                                   std::to_string(e.to));
    }
    edges.emplace_back(e.from, e.to);
  }
  return build_dag(g.num_nodes(), edges);
}

// ---------------------------------------------------------------------------
// Edge-list persistence

void write_edge_list(std::ostream& out, const MixedGraph& g) {
  out << "nodes " << g.num_nodes() << '\n';
  for (const auto& e : g.edges()) {
    out << e.from << ' ' << e.to << ' ' << (e.directed ? "->" : "--") << '\n';
  }
}

MixedGraph read_edge_list(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw ParseError(msg, static_cast<int>(line_no), 1);
  };
  std::optional<MixedGraph> g;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line[line.find_first_not_of(" \t")] == '#') continue;
    std::istringstream fields(line);
    if (!g) {
      std::string keyword;
      long long count = -1;
      if (!(fields >> keyword >> count) || keyword != "nodes" || count < 0) {
        fail("expected header 'nodes N'");
      }
      g.emplace(static_cast<std::size_t>(count));
      continue;
    }
    long long a = -1;
    long long b = -1;
    std::string mark;
    std::string rest;
    if (!(fields >> a >> b >> mark) || (fields >> rest) || a < 0 || b < 0) {
      fail("expected 'i j ->' or 'i j --'");
    }
    const auto from = static_cast<Node>(a);
    const auto to = static_cast<Node>(b);
    if (from >= g->num_nodes() || to >= g->num_nodes() || from == to) fail("bad endpoint");
    if (g->adjacent(from, to)) fail("duplicate edge");
    if (mark == "->") {
      g->set_directed(from, to);
    } else if (mark == "--") {
      g->set_undirected(from, to);
    } else {
      fail("unknown edge mark '" + mark + "'");
    }
  }
  if (!g) throw ParseError("missing 'nodes N' header", static_cast<int>(line_no), 1);
  return *g;
}

void save_graph(const std::string& path, const MixedGraph& g) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  write_edge_list(out, g);
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path);
}

MixedGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return read_edge_list(in);
}

}  // namespace spc
