#pragma once

#include <chrono>
#include <map>
#include <utility>
#include <vector>

#include "ci_test.hpp"
#include "graph.hpp"
#include "shapley.hpp"

namespace spc {

struct SepSetRecord {
  NodeSet set;
  double p = 0.0;
};

// Separating sets found by the adjacency search, keyed by unordered pair.
class SepSetStore {
 public:
  void add(Node a, Node b, NodeSet set, double p);
  // Empty when the pair was never separated.
  const std::vector<SepSetRecord>& get(Node a, Node b) const;
  bool separated(Node a, Node b) const { return !get(a, b).empty(); }
  std::size_t num_pairs() const { return records_.size(); }

 private:
  std::map<std::pair<Node, Node>, std::vector<SepSetRecord>> records_;
};

struct SkeletonResult {
  MixedGraph skeleton;
  SepSetStore sepsets;
  // Largest conditioning-set size actually tested.
  std::size_t max_conditioning_size = 0;
};

// PC-stable adjacency search: adjacency sets are frozen at the start of
// each level and removals are applied when the level ends, so the result
// does not depend on variable order or on the worker count.
SkeletonResult skeleton_search(const CITester& cit, double alpha, std::size_t workers = 1);

struct OrientationResult {
  MixedGraph pdag;
  std::vector<SivReport> siv_reports;  // SPC only
};

OrientationResult orient_v_structures(const MixedGraph& skeleton, const SepSetStore& sepsets,
                                      const CITester& cit, DecisionRuleKind rule,
                                      const RuleOptions& options = {});

struct PcOptions {
  double alpha = kDefaultAlpha;
  DecisionRuleKind rule = DecisionRuleKind::kSpc;
  RuleOptions rule_options;  // its alpha is overwritten with `alpha`
  std::size_t workers = 1;
};

struct PcRunResult {
  MixedGraph cpdag;
  SepSetStore sepsets;
  std::vector<SivReport> siv_reports;
  std::size_t num_tests = 0;  // distinct tests evaluated (cache misses)
  std::chrono::duration<double> elapsed{0.0};
};

// Adjacency search, v-structure orientation under the chosen rule, then
// Meek closure. All tests go through one shared cache.
PcRunResult run_pc(const CITester& cit, const PcOptions& options = {});

}  // namespace spc
