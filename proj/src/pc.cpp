#include "pc.hpp"

#include <algorithm>
#include <set>
#include <thread>

#include "errors.hpp"

namespace spc {

namespace {

const std::vector<SepSetRecord> kNoRecords;

// Calls fn(index) for index in [0, count), spread over `workers` threads.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Visits every size-`size` subset of `base` in lexicographic order until
// fn returns true.
template <typename Fn>
bool for_each_subset(const NodeSet& base, std::size_t size, Fn&& fn) {
  if (size > base.size()) return false;
  std::vector<std::size_t> idx(size);
  for (std::size_t t = 0; t < size; ++t) idx[t] = t;
  while (true) {
    NodeSet s(size);
    for (std::size_t t = 0; t < size; ++t) s[t] = base[idx[t]];
    if (fn(s)) return true;
    std::size_t t = size;
    while (t > 0 && idx[t - 1] == base.size() - size + t - 1) --t;
    if (t == 0) return false;
    ++idx[t - 1];
    for (std::size_t u = t; u < size; ++u) idx[u] = idx[u - 1] + 1;
  }
}

NodeSet without(NodeSet s, Node v) {
  std::erase(s, v);
  return s;
}

// Both arrows of the v-structure or nothing.
bool orient_collider(MixedGraph& g, const UnshieldedTriple& t) {
  MixedGraph trial = g;
  if (orient_if_safe(trial, t.i, t.j) && orient_if_safe(trial, t.k, t.j)) {
    g = std::move(trial);
    return true;
  }
  return false;
}

// Drops every accepted triple whose arrowheads contradict another accepted
// triple, so the outcome does not depend on processing order.
std::vector<UnshieldedTriple> drop_conflicts(const std::vector<UnshieldedTriple>& accepted) {
  std::set<std::pair<Node, Node>> arrows;
  for (const auto& t : accepted) {
    arrows.emplace(t.i, t.j);
    arrows.emplace(t.k, t.j);
  }
  std::vector<UnshieldedTriple> kept;
  for (const auto& t : accepted) {
    if (arrows.contains({t.j, t.i}) || arrows.contains({t.j, t.k})) continue;
    kept.push_back(t);
  }
  return kept;
}

}  // namespace

void SepSetStore::add(Node a, Node b, NodeSet set, double p) {
  records_[{std::min(a, b), std::max(a, b)}].push_back({std::move(set), p});
}

const std::vector<SepSetRecord>& SepSetStore::get(Node a, Node b) const {
  auto it = records_.find({std::min(a, b), std::max(a, b)});
  return it == records_.end() ? kNoRecords : it->second;
}

SkeletonResult skeleton_search(const CITester& cit, double alpha, std::size_t workers) {
  validate(CITestConfig{alpha});
  const std::size_t n = cit.num_variables();
  SkeletonResult result{MixedGraph::complete(n), {}, 0};
  MixedGraph& g = result.skeleton;

  for (std::size_t level = 0;; ++level) {
    std::vector<NodeSet> adj(n);
    bool any = false;
    for (Node v = 0; v < n; ++v) {
      adj[v] = g.neighbors(v);
      if (adj[v].size() >= level + 1) any = true;
    }
    if (!any) break;

    std::vector<std::pair<Node, Node>> edges;
    for (Node a = 0; a < n; ++a) {
      for (Node b : adj[a]) {
        if (a < b) edges.emplace_back(a, b);
      }
    }
    std::vector<std::optional<SepSetRecord>> found(edges.size());
    std::vector<std::uint8_t> tested_at_level(edges.size(), 0);
    parallel_for(edges.size(), workers, [&](std::size_t e) {
      const auto [a, b] = edges[e];
      const NodeSet side_a = without(adj[a], b);
      const NodeSet side_b = without(adj[b], a);
      std::set<NodeSet> seen;
      auto try_set = [&](const NodeSet& s) {
        if (!seen.insert(s).second) return false;
        tested_at_level[e] = 1;
        const double p = cit.test(a, b, s);
        if (p >= alpha) {
          found[e] = SepSetRecord{s, p};
          return true;
        }
        return false;
      };
      if (!for_each_subset(side_a, level, try_set)) for_each_subset(side_b, level, try_set);
    });

    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (tested_at_level[e]) result.max_conditioning_size = std::max(result.max_conditioning_size, level);
      if (found[e]) {
        g.remove_edge(edges[e].first, edges[e].second);
        result.sepsets.add(edges[e].first, edges[e].second, found[e]->set, found[e]->p);
      }
    }
  }
  return result;
}

OrientationResult orient_v_structures(const MixedGraph& skeleton, const SepSetStore& sepsets,
                                      const CITester& cit, DecisionRuleKind rule,
                                      const RuleOptions& options) {
  OrientationResult out{skeleton.skeleton(), {}};
  MixedGraph& g = out.pdag;
  const std::vector<UnshieldedTriple> triples = unshielded_triples(g);

  switch (rule) {
    case DecisionRuleKind::kSpc: {
      std::vector<std::pair<double, UnshieldedTriple>> accepted;
      for (const auto& t : triples) {
        SivReport report = spc_decide(cit, out.pdag, t, options);
        if (report.decision) accepted.emplace_back(report.middle_phi, t);
        out.siv_reports.push_back(std::move(report));
      }
      // Most negative SIV first; canonical triple order among equals.
      std::stable_sort(accepted.begin(), accepted.end(),
                       [](const auto& x, const auto& y) { return x.first < y.first; });
      MixedGraph work = g;
      for (const auto& [phi, t] : accepted) orient_collider(work, t);
      g = std::move(work);
      break;
    }
    case DecisionRuleKind::kMaxPc: {
      std::vector<std::pair<double, UnshieldedTriple>> accepted;
      for (const auto& t : triples) {
        const MaxPcDecision d = maxpc_decide(cit, g, t, options);
        if (d.decision) accepted.emplace_back(d.max_p, t);
      }
      std::stable_sort(accepted.begin(), accepted.end(),
                       [](const auto& x, const auto& y) { return x.first > y.first; });
      MixedGraph work = g;
      for (const auto& [p, t] : accepted) orient_collider(work, t);
      g = std::move(work);
      break;
    }
    case DecisionRuleKind::kCpc:
    case DecisionRuleKind::kMpc: {
      std::vector<UnshieldedTriple> accepted;
      for (const auto& t : triples) {
        const auto sets = separating_sets(cit, g, t, options.alpha);
        const bool fire = rule == DecisionRuleKind::kCpc ? cpc_decide(sets, t.j) : mpc_decide(sets, t.j);
        if (fire) accepted.push_back(t);
      }
      MixedGraph work = g;
      for (const auto& t : drop_conflicts(accepted)) orient_collider(work, t);
      g = std::move(work);
      break;
    }
    case DecisionRuleKind::kVanilla: {
      MixedGraph work = g;
      for (const auto& t : triples) {
        const auto& records = sepsets.get(t.i, t.k);
        if (records.empty()) continue;
        const NodeSet& first = records.front().set;
        if (!std::binary_search(first.begin(), first.end(), t.j)) orient_collider(work, t);
      }
      g = std::move(work);
      break;
    }
  }
  return out;
}

PcRunResult run_pc(const CITester& cit, const PcOptions& options) {
  validate(CITestConfig{options.alpha});
  RuleOptions rule_options = options.rule_options;
  rule_options.alpha = options.alpha;

  const auto start = std::chrono::steady_clock::now();
  CachedTest cached(cit);
  SkeletonResult skeleton = skeleton_search(cached, options.alpha, options.workers);
  OrientationResult oriented =
      orient_v_structures(skeleton.skeleton, skeleton.sepsets, cached, options.rule, rule_options);

  PcRunResult result;
  result.cpdag = meek_closure(std::move(oriented.pdag));
  result.sepsets = std::move(skeleton.sepsets);
  result.siv_reports = std::move(oriented.siv_reports);
  result.num_tests = cached.num_evaluations();
  result.elapsed = std::chrono::steady_clock::now() - start;
  return result;
}

}  // namespace spc
