// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bench.hpp"
#include "bif.hpp"
#include "ci_test.hpp"
#include "dgp.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "metrics.hpp"
#include "oracles.hpp"
#include "pc.hpp"
#include "shapley.hpp"

using namespace spc;
using Clock = std::chrono::steady_clock;

namespace {

const std::string kData = SPC_DATA_DIR;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ER DAGs with |V| in 4..8 and d in {1, 2, 3}; cells that are too dense or
// have a non-integral edge count are skipped.
std::vector<Dag> population() {
  std::vector<Dag> out;
  for (std::size_t n = 4; n <= 8; ++n) {
    for (double d : {1.0, 2.0, 3.0}) {
      for (std::uint64_t seed = 0; seed < 25; ++seed) {
        try {
          out.push_back(er_dag(n, d, 1000 * n + 100 * static_cast<std::uint64_t>(d) + seed));
        } catch (const Error&) {
          break;
        }
      }
    }
  }
  return out;
}

Outcome criterion1(const std::vector<Dag>& dags) {
  const auto t0 = Clock::now();
  std::size_t exact = 0;
  for (const Dag& g : dags) {
    if (run_pc(oracle_cit(g), {}).cpdag == dag_to_cpdag(g)) ++exact;
  }
  const double t = seconds_since(t0);
  std::ostringstream msg;
  msg << exact << "/" << dags.size() << " oracle runs equal the true CPDAG in " << t << " s";
  return {dags.size() >= 200 && exact == dags.size() && t < 60.0, msg.str()};
}

Outcome criterion2(const std::vector<Dag>& dags) {
  std::size_t triples = 0, violations = 0;
  for (const Dag& g : dags) {
    const OracleTest cit = oracle_cit(g);
    const MixedGraph skel = g.to_mixed().skeleton();
    for (const auto& t : unshielded_triples(skel)) {
      const bool collider = g.has_edge(t.i, t.j) && g.has_edge(t.k, t.j);
      const double phi = siv(cit, skel, t, t.j);
      if ((phi < 0.0) != collider) ++violations;
      ++triples;
    }
  }
  std::ostringstream msg;
  msg << violations << " sign violations over " << triples << " unshielded triples";
  return {triples > 0 && violations == 0, msg.str()};
}

Outcome criterion3(const std::vector<Dag>& dags) {
  std::size_t checked = 0;
  double worst = 0.0;
  for (const Dag& g : dags) {
    if (g.num_nodes() > 6) continue;
    const OracleTest cit = oracle_cit(g);
    const MixedGraph skel = g.to_mixed().skeleton();
    for (const auto& t : unshielded_triples(skel)) {
      NodeSet cands = skel.neighbors(t.i);
      for (Node v : skel.neighbors(t.k)) cands.push_back(v);
      for (Node c : make_node_set(cands)) {
        if (c == t.i || c == t.k) continue;
        worst = std::max(worst, std::abs(siv(cit, skel, t, c) - oracle::siv_by_enumeration(cit, skel, t.i, t.k, c)));
        ++checked;
      }
    }
  }
  std::ostringstream msg;
  msg << checked << " (triple, candidate) pairs, max |diff| " << worst;
  return {checked > 0 && worst <= 1e-12, msg.str()};
}

Outcome criterion4() {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index n = 50 + 10 * (rep % 10);
    const Eigen::Index p = 3 + rep % 4;
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < p; ++c) x(r, c) = normal(rng);
    }
    // Mix columns so the variables are correlated.
    Eigen::MatrixXd mix = Eigen::MatrixXd::Identity(p, p);
    for (Eigen::Index c = 1; c < p; ++c) mix(c - 1, c) = 0.8;
    x = x * mix;
    Dataset ds;
    ds.values = x;
    const Eigen::MatrixXd corr = correlation_matrix(ds);
    const auto vars = static_cast<Node>(p);
    for (Node i = 0; i < vars; ++i) {
      for (Node j = i + 1; j < vars; ++j) {
        NodeSet z;
        for (Node v = 0; v < vars; ++v) {
          if (v != i && v != j && (v + rep) % 2 == 0) z.push_back(v);
        }
        worst = std::max(worst, std::abs(partial_correlation(corr, i, j, z) -
                                         oracle::partial_corr_by_regression(x, i, j, z)));
      }
    }
  }

  int rejections = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    Dataset ds;
    ds.values.resize(200, 3);
    for (Eigen::Index r = 0; r < 200; ++r) {
      for (Eigen::Index c = 0; c < 3; ++c) ds.values(r, c) = normal(rng);
    }
    if (FisherZTest(ds).test(0, 1, {2}) < 0.01) ++rejections;
  }
  const double rate = rejections / 1000.0;
  std::ostringstream msg;
  msg << "max partial-correlation diff " << worst << ", null rejection rate " << rate;
  return {worst <= 1e-8 && rate >= 0.005 && rate <= 0.02, msg.str()};
}

Outcome criterion5() {
  const std::map<std::string, double> table = {
      {"cancer", 0.40},  {"earthquake", 0.40}, {"survey", 0.40},    {"asia", 0.29},       {"sachs", 0.31},
      {"alarm", 0.07},   {"child", 0.13},      {"insurance", 0.15}, {"hailfinder", 0.04}, {"hepar2", 0.05},
  };
  bool ok = std::abs(saturation(10, 4) - 8.0 / 9.0) < 1e-12 && std::round(saturation(10, 4) * 10) / 10 == 0.9;
  ok = ok && std::abs(saturation(50, 4) - 0.1633) < 5e-5;
  std::size_t matched = 0;
  for (const auto& [name, expected] : table) {
    const Dag g = load_bif(kData + "/bnlearn/" + name + ".bif").graph();
    const double d = static_cast<double>(g.num_edges()) / static_cast<double>(g.num_nodes());
    if (std::abs(std::round(saturation(g.num_nodes(), d) * 100) / 100 - expected) < 1e-9) ++matched;
  }
  std::ostringstream msg;
  msg << "zeta(10,4)=" << saturation(10, 4) << " zeta(50,4)=" << saturation(50, 4) << ", " << matched
      << "/10 network saturations match to 2 decimals";
  return {ok && matched == table.size(), msg.str()};
}

Outcome criterion6() {
  const auto t0 = Clock::now();
  ExperimentConfig c;
  c.nodes = {10};
  c.densities = {1};
  c.sems = {"linear-gauss"};
  c.s = {500};
  c.alphas = {0.01};
  c.rules = {"SPC", "MaxPC", "Random"};
  c.replicates = 10;
  c.seed = 0;
  std::map<std::string, double> mean;
  std::size_t failed = 0;
  for (const auto& r : run_suite(c)) {
    if (!r.ok) {
      ++failed;
      continue;
    }
    mean[r.rule] += r.metrics.nshd / 10.0;
  }
  const double t = seconds_since(t0);
  std::ostringstream msg;
  msg << "mean nSHD SPC " << mean["SPC"] << ", MaxPC " << mean["MaxPC"] << ", Random " << mean["Random"] << " in "
      << t << " s";
  const bool ok = failed == 0 && mean["SPC"] <= mean["MaxPC"] + 0.05 && mean["SPC"] < mean["Random"] &&
                  mean["MaxPC"] < mean["Random"] && t < 300.0;
  return {ok, msg.str()};
}

Outcome criterion7() {
  const Dag truth = er_dag(10, 2, 17);
  const Dataset ds = simulate_linear(truth, NoiseKind::kGauss, 1000, 18).first;
  std::mt19937_64 rng(19);
  std::size_t equal = 0, total = 0;
  std::vector<std::vector<Node>> perms;
  for (int p = 0; p < 20; ++p) perms.push_back(oracle::random_permutation(10, rng));
  for (auto rule : {DecisionRuleKind::kSpc, DecisionRuleKind::kCpc, DecisionRuleKind::kMpc}) {
    PcOptions opts;
    opts.rule = rule;
    const MixedGraph base = run_pc(FisherZTest(ds), opts).cpdag;
    for (const auto& perm : perms) {
      Dataset moved = ds;
      for (Node v = 0; v < 10; ++v) {
        moved.values.col(static_cast<Eigen::Index>(perm[v])) = ds.values.col(static_cast<Eigen::Index>(v));
      }
      if (run_pc(FisherZTest(moved), opts).cpdag == base.relabeled(perm)) ++equal;
      ++total;
    }
  }
  std::ostringstream msg;
  msg << equal << "/" << total << " permuted runs equal the relabeled output";
  return {equal == total, msg.str()};
}

Outcome criterion8() {
  std::mt19937_64 rng(8);
  std::size_t agree = 0;
  const std::size_t pairs = 600;
  for (std::size_t rep = 0; rep < pairs; ++rep) {
    const std::size_t n = 2 + rep % 4;
    const Dag truth = oracle::random_dag(n, 0.5, rng);
    const Dag est = oracle::random_dag(n, 0.5, rng);
    if (sid(est.to_mixed(), truth) == oracle::sid_by_paths(est.to_mixed(), truth)) ++agree;
  }
  std::size_t dags = 0, zero = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    for (const Dag& g : oracle::all_dags(n)) {
      ++dags;
      if (sid(g.to_mixed(), g) == 0) ++zero;
    }
  }
  std::ostringstream msg;
  msg << agree << "/" << pairs << " pairs agree with the adjustment oracle; sid(g,g)=0 on " << zero << "/" << dags
      << " DAGs";
  return {agree == pairs && zero == dags, msg.str()};
}

Outcome criterion9() {
  const std::vector<std::tuple<std::string, std::size_t, std::size_t>> table = {
      {"cancer", 5, 4},  {"earthquake", 5, 4}, {"survey", 6, 6},     {"asia", 8, 8},         {"sachs", 11, 17},
      {"alarm", 37, 46}, {"child", 20, 25},    {"insurance", 27, 52}, {"hailfinder", 56, 66}, {"hepar2", 70, 123},
  };
  std::size_t matched = 0;
  for (const auto& [name, nodes, edges] : table) {
    const Dag g = load_bif(kData + "/bnlearn/" + name + ".bif").graph();
    if (g.num_nodes() == nodes && g.num_edges() == edges) ++matched;
  }
  const auto t0 = Clock::now();
  const DiscreteBayesNet asia = load_bif(kData + "/bnlearn/asia.bif");
  const Dataset ds = encode_standardize(sample_bn(asia, 2000, 9));
  const PcRunResult r = run_pc(FisherZTest(ds), {});
  const double t = seconds_since(t0);
  std::ostringstream msg;
  msg << matched << "/10 networks with exact counts; ASIA pipeline produced " << r.cpdag.num_edges() << " edges in "
      << t << " s";
  return {matched == table.size() && r.cpdag.num_edges() > 0 && t < 60.0, msg.str()};
}

std::string csv_without_time(const std::vector<ResultRecord>& records) {
  ResultTable t = to_table(records);
  const auto col = static_cast<std::size_t>(std::find(t.header.begin(), t.header.end(), "elapsed_s") - t.header.begin());
  std::ostringstream out;
  for (auto& row : t.rows) {
    row[col].clear();
    for (const auto& cell : row) out << cell << ',';
    out << '\n';
  }
  return out.str();
}

std::string json_without_time(const std::vector<ResultRecord>& records) {
  std::ostringstream out;
  write_results_json(out, records);
  auto doc = nlohmann::json::parse(out.str());
  for (auto& row : doc) row.erase("elapsed_s");
  return doc.dump();
}

Outcome criterion10() {
  ExperimentConfig c;
  c.nodes = {8, 12};
  c.densities = {1, 2};
  c.sems = {"linear-gauss", "mim"};
  c.s = {30};
  c.rules = {"SPC", "MaxPC", "CPC", "Random"};
  c.replicates = 3;
  c.seed = 42;
  const auto a = run_suite(c);
  const auto b = run_suite(c);
  c.workers = 4;
  const auto d = run_suite(c);
  const bool csv_same = csv_without_time(a) == csv_without_time(b) && csv_without_time(a) == csv_without_time(d);
  const bool json_same = json_without_time(a) == json_without_time(b) && json_without_time(a) == json_without_time(d);
  std::ostringstream msg;
  msg << a.size() << " rows; CSV " << (csv_same ? "identical" : "differs") << ", JSON "
      << (json_same ? "identical" : "differs") << " across repeats and worker counts";
  return {csv_same && json_same, msg.str()};
}

}  // namespace

int main() {
  const std::vector<Dag> dags = population();
  const std::vector<std::function<Outcome()>> criteria = {
      [&] { return criterion1(dags); }, [&] { return criterion2(dags); }, [&] { return criterion3(dags); },
      criterion4, criterion5, criterion6, criterion7, criterion8, criterion9, criterion10,
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << (k + 1) << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
