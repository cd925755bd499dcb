#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <random>
#include <tuple>

#include "ci_test.hpp"
#include "dgp.hpp"
#include "errors.hpp"
#include "oracles.hpp"
#include "pc.hpp"

using namespace spc;

namespace {

MixedGraph undirected(std::size_t n, const std::vector<std::pair<Node, Node>>& edges) {
  MixedGraph g(n);
  for (auto [a, b] : edges) g.set_undirected(a, b);
  return g;
}

Dag relabel(const Dag& g, const std::vector<Node>& perm) {
  std::vector<std::pair<Node, Node>> moved;
  for (auto [a, b] : g.edges()) moved.emplace_back(perm[a], perm[b]);
  return build_dag(g.num_nodes(), moved);
}

Dataset permute_columns(const Dataset& ds, const std::vector<Node>& perm) {
  Dataset out = ds;
  for (Node v = 0; v < perm.size(); ++v) {
    out.values.col(static_cast<Eigen::Index>(perm[v])) = ds.values.col(static_cast<Eigen::Index>(v));
  }
  return out;
}

std::size_t max_degree(const MixedGraph& g) {
  std::size_t d = 0;
  for (Node v = 0; v < g.num_nodes(); ++v) d = std::max(d, g.neighbors(v).size());
  return d;
}

// p-values from a table keyed by (min endpoint, max endpoint, set).
class PairTableTest final : public CITester {
 public:
  using Key = std::tuple<Node, Node, NodeSet>;
  PairTableTest(std::size_t n, std::map<Key, double> table) : n_(n), table_(std::move(table)) {}
  std::size_t num_variables() const override { return n_; }
  double test(Node i, Node j, const NodeSet& s) const override {
    auto it = table_.find({std::min(i, j), std::max(i, j), s});
    return it == table_.end() ? 0.0 : it->second;
  }

 private:
  std::size_t n_;
  std::map<Key, double> table_;
};

// Remembers the largest conditioning set it was asked about.
class RecordingTest final : public CITester {
 public:
  explicit RecordingTest(const CITester& inner) : inner_(inner) {}
  std::size_t num_variables() const override { return inner_.num_variables(); }
  double test(Node i, Node j, const NodeSet& s) const override {
    std::lock_guard lock(mutex_);
    largest = std::max(largest, s.size());
    return inner_.test(i, j, s);
  }
  mutable std::size_t largest = 0;

 private:
  const CITester& inner_;
  mutable std::mutex mutex_;
};

// Path 0-1-2-3 whose two triples both look like colliders.
// Conditioning on the middle lowers the endpoint p-value by `drop`.
PairTableTest conflicting_triples(double first_p, double first_drop, double second_p, double second_drop) {
  std::map<PairTableTest::Key, double> t;
  t[{0, 2, {}}] = first_p;
  t[{0, 2, {3}}] = first_p;
  t[{0, 2, {1}}] = first_p - first_drop;
  t[{0, 2, {1, 3}}] = first_p - first_drop;
  t[{1, 3, {}}] = second_p;
  t[{1, 3, {0}}] = second_p;
  t[{1, 3, {2}}] = second_p - second_drop;
  t[{1, 3, {0, 2}}] = second_p - second_drop;
  return PairTableTest(4, std::move(t));
}

}  // namespace

TEST(SkeletonSearch, Chain) {
  const OracleTest cit = oracle_cit(build_dag(3, {{0, 1}, {1, 2}}));
  const SkeletonResult r = skeleton_search(cit, 0.01);
  EXPECT_EQ(r.skeleton, undirected(3, {{0, 1}, {1, 2}}));
  ASSERT_EQ(r.sepsets.get(0, 2).size(), 1u);
  EXPECT_EQ(r.sepsets.get(2, 0)[0].set, (NodeSet{1}));
  EXPECT_FALSE(r.sepsets.separated(0, 1));
  EXPECT_EQ(r.max_conditioning_size, 1u);
}

TEST(SkeletonSearch, Collider) {
  const OracleTest cit = oracle_cit(build_dag(3, {{0, 2}, {1, 2}}));
  const SkeletonResult r = skeleton_search(cit, 0.01);
  EXPECT_EQ(r.skeleton, undirected(3, {{0, 2}, {1, 2}}));
  ASSERT_EQ(r.sepsets.get(0, 1).size(), 1u);
  EXPECT_TRUE(r.sepsets.get(0, 1)[0].set.empty());
  EXPECT_GE(r.sepsets.get(0, 1)[0].p, 0.01);
}

TEST(SkeletonSearch, OracleRecoversTrueSkeleton) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 3 + rep % 4;
    const Dag truth = oracle::random_dag(n, 0.2 + 0.15 * (rep % 4), rng);
    const OracleTest cit = oracle_cit(truth);
    const RecordingTest recorder(cit);
    const SkeletonResult r = skeleton_search(recorder, 0.01);
    const MixedGraph true_skel = truth.to_mixed().skeleton();
    ASSERT_EQ(r.skeleton, true_skel) << "rep " << rep;
    EXPECT_EQ(recorder.largest, r.max_conditioning_size);
    EXPECT_LE(r.max_conditioning_size, max_degree(true_skel));
    for (Node a = 0; a < n; ++a) {
      for (Node b = a + 1; b < n; ++b) {
        for (const auto& rec : r.sepsets.get(a, b)) {
          EXPECT_GE(rec.p, 0.01);
          EXPECT_TRUE(d_separated(truth, a, b, rec.set));
        }
      }
    }
  }
}

TEST(SkeletonSearch, RejectsBadAlpha) {
  const OracleTest cit = oracle_cit(build_dag(3, {}));
  EXPECT_THROW(skeleton_search(cit, 0.0), Error);
  EXPECT_THROW(skeleton_search(cit, 1.5), Error);
}

TEST(OrientVStructures, OracleColliderAndChain) {
  const OracleTest collider = oracle_cit(build_dag(3, {{0, 2}, {1, 2}}));
  const SkeletonResult s1 = skeleton_search(collider, 0.01);
  for (auto rule : {DecisionRuleKind::kSpc, DecisionRuleKind::kMaxPc, DecisionRuleKind::kCpc,
                    DecisionRuleKind::kMpc, DecisionRuleKind::kVanilla}) {
    const MixedGraph g = orient_v_structures(s1.skeleton, s1.sepsets, collider, rule).pdag;
    EXPECT_TRUE(g.is_directed(0, 2)) << to_string(rule);
    EXPECT_TRUE(g.is_directed(1, 2)) << to_string(rule);
  }
  const OracleTest chain = oracle_cit(build_dag(3, {{0, 1}, {1, 2}}));
  const SkeletonResult s2 = skeleton_search(chain, 0.01);
  for (auto rule : {DecisionRuleKind::kSpc, DecisionRuleKind::kMaxPc, DecisionRuleKind::kCpc,
                    DecisionRuleKind::kMpc, DecisionRuleKind::kVanilla}) {
    const MixedGraph g = orient_v_structures(s2.skeleton, s2.sepsets, chain, rule).pdag;
    EXPECT_EQ(g, s2.skeleton) << to_string(rule);
  }
}

TEST(OrientVStructures, SpcReportsOnePerTriple) {
  const OracleTest cit = oracle_cit(build_dag(4, {{0, 2}, {1, 2}, {2, 3}}));
  const SkeletonResult s = skeleton_search(cit, 0.01);
  const OrientationResult r = orient_v_structures(s.skeleton, s.sepsets, cit, DecisionRuleKind::kSpc);
  EXPECT_EQ(r.siv_reports.size(), unshielded_triples(s.skeleton).size());
}

TEST(OrientVStructures, ConflictStrongerTripleWins) {
  const MixedGraph path = undirected(4, {{0, 1}, {1, 2}, {2, 3}});
  const SepSetStore none;
  for (auto rule : {DecisionRuleKind::kSpc, DecisionRuleKind::kMaxPc}) {
    // First triple (0,1,2) carries the stronger evidence.
    const PairTableTest a = conflicting_triples(0.9, 0.8, 0.8, 0.3);
    const MixedGraph ga = orient_v_structures(path, none, a, rule).pdag;
    EXPECT_TRUE(ga.is_directed(0, 1)) << to_string(rule);
    EXPECT_TRUE(ga.is_directed(2, 1)) << to_string(rule);
    EXPECT_TRUE(ga.is_undirected(2, 3)) << to_string(rule);

    const PairTableTest b = conflicting_triples(0.6, 0.3, 0.8, 0.7);
    const MixedGraph gb = orient_v_structures(path, none, b, rule).pdag;
    EXPECT_TRUE(gb.is_directed(1, 2)) << to_string(rule);
    EXPECT_TRUE(gb.is_directed(3, 2)) << to_string(rule);
    EXPECT_TRUE(gb.is_undirected(0, 1)) << to_string(rule);
  }
}

TEST(OrientVStructures, ConflictingTriplesDroppedByCpcAndMpc) {
  // Every set separates both pairs, except sets that contain the middle.
  std::map<PairTableTest::Key, double> t;
  t[{0, 2, {}}] = 0.5;
  t[{0, 2, {3}}] = 0.5;
  t[{1, 3, {}}] = 0.5;
  t[{1, 3, {0}}] = 0.5;
  const PairTableTest cit(4, t);
  const MixedGraph path = undirected(4, {{0, 1}, {1, 2}, {2, 3}});
  for (auto rule : {DecisionRuleKind::kCpc, DecisionRuleKind::kMpc}) {
    EXPECT_EQ(orient_v_structures(path, {}, cit, rule).pdag, path) << to_string(rule);
  }
}

TEST(RunPc, OracleRecoversTrueCpdag) {
  std::mt19937_64 rng(123);
  int graphs = 0;
  for (int rep = 0; rep < 220; ++rep) {
    const std::size_t n = 3 + rep % 4;
    const Dag truth = oracle::random_dag(n, 0.25 + 0.1 * (rep % 5), rng);
    const PcRunResult r = run_pc(oracle_cit(truth), {});
    ASSERT_EQ(r.cpdag, dag_to_cpdag(truth)) << "rep " << rep;
    ++graphs;
  }
  EXPECT_GE(graphs, 200);
}

TEST(RunPc, OracleSoundnessForOtherOrderIndependentRules) {
  std::mt19937_64 rng(321);
  for (int rep = 0; rep < 100; ++rep) {
    const Dag truth = oracle::random_dag(4 + rep % 3, 0.4, rng);
    for (auto rule : {DecisionRuleKind::kMaxPc, DecisionRuleKind::kCpc, DecisionRuleKind::kMpc}) {
      PcOptions opts;
      opts.rule = rule;
      EXPECT_EQ(run_pc(oracle_cit(truth), opts).cpdag, dag_to_cpdag(truth)) << to_string(rule);
    }
  }
}

TEST(RunPc, EdgelessOracleCountsPairs) {
  for (std::size_t n : {2u, 5u, 9u}) {
    const PcRunResult r = run_pc(oracle_cit(build_dag(n, {})), {});
    EXPECT_EQ(r.cpdag.num_edges(), 0u);
    EXPECT_EQ(r.num_tests, n * (n - 1) / 2);
    EXPECT_GE(r.elapsed.count(), 0.0);
  }
}

TEST(RunPc, FisherZRecoversCollider) {
  const Dag truth = build_dag(3, {{0, 2}, {1, 2}});
  const MixedGraph expected = truth.to_mixed();
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Dataset ds = simulate_linear(truth, NoiseKind::kGauss, 5000, seed).first;
    if (run_pc(FisherZTest(ds), {}).cpdag == expected) ++hits;
  }
  EXPECT_GE(hits, 95);
}

TEST(RunPc, WorkerCountDoesNotChangeOutput) {
  const Dag truth = er_dag(12, 2, 8);
  const Dataset ds = simulate_linear(truth, NoiseKind::kGauss, 1500, 9).first;
  const FisherZTest cit(ds);
  PcOptions one;
  PcOptions many;
  many.workers = 4;
  const PcRunResult a = run_pc(cit, one);
  const PcRunResult b = run_pc(cit, many);
  EXPECT_EQ(a.cpdag, b.cpdag);
  EXPECT_EQ(a.num_tests, b.num_tests);
}

TEST(RunPc, OutputHasNoDirectedCycle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dag truth = er_dag(10, 2, seed);
    const Dataset ds = simulate_linear(truth, NoiseKind::kGauss, 300, seed + 100).first;
    for (auto rule : {DecisionRuleKind::kSpc, DecisionRuleKind::kMaxPc, DecisionRuleKind::kCpc,
                      DecisionRuleKind::kMpc, DecisionRuleKind::kVanilla}) {
      PcOptions opts;
      opts.rule = rule;
      EXPECT_TRUE(run_pc(FisherZTest(ds), opts).cpdag.directed_part_acyclic()) << to_string(rule);
    }
  }
}

TEST(RunPc, OrderIndependenceOnData) {
  std::mt19937_64 rng(99);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dag truth = er_dag(8, 1.5, seed);
    const Dataset ds = simulate_linear(truth, NoiseKind::kGauss, 400, seed + 50).first;
    for (auto rule : {DecisionRuleKind::kSpc, DecisionRuleKind::kCpc, DecisionRuleKind::kMpc}) {
      PcOptions opts;
      opts.rule = rule;
      const MixedGraph base = run_pc(FisherZTest(ds), opts).cpdag;
      for (int p = 0; p < 4; ++p) {
        const auto perm = oracle::random_permutation(8, rng);
        const MixedGraph moved = run_pc(FisherZTest(permute_columns(ds, perm)), opts).cpdag;
        EXPECT_EQ(moved, base.relabeled(perm)) << to_string(rule) << " seed " << seed;
      }
    }
  }
}

TEST(RunPc, OrderIndependenceUnderOracle) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 40; ++rep) {
    const Dag truth = oracle::random_dag(6, 0.4, rng);
    const auto perm = oracle::random_permutation(6, rng);
    const MixedGraph a = run_pc(oracle_cit(truth), {}).cpdag;
    const MixedGraph b = run_pc(oracle_cit(relabel(truth, perm)), {}).cpdag;
    EXPECT_EQ(b, a.relabeled(perm));
  }
}
