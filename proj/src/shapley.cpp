#include "shapley.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace spc {

namespace {

constexpr std::size_t kMaxPowerSetBase = 24;

void check_triple(const MixedGraph& g, const UnshieldedTriple& t) {
  const std::size_t n = g.num_nodes();
  if (t.i >= n || t.j >= n || t.k >= n) throw Error(ErrorCode::kIndex, "triple node out of range");
  if (t.i == t.j || t.j == t.k || t.i == t.k || !g.adjacent(t.i, t.j) || !g.adjacent(t.j, t.k) ||
      g.adjacent(t.i, t.k)) {
    throw Error(ErrorCode::kNotUnshieldedTriple,
                "(" + std::to_string(t.i) + ", " + std::to_string(t.j) + ", " + std::to_string(t.k) +
                    ") is not an unshielded triple");
  }
}

NodeSet without(NodeSet s, std::initializer_list<Node> drop) {
  std::erase_if(s, [&](Node v) { return std::find(drop.begin(), drop.end(), v) != drop.end(); });
  return s;
}

std::vector<NodeSet> power_set(const NodeSet& base) {
  if (base.size() > kMaxPowerSetBase) {
    throw Error(ErrorCode::kInvalidArgument,
                "adjacency set of size " + std::to_string(base.size()) + " is too large to enumerate");
  }
  const std::size_t count = std::size_t{1} << base.size();
  std::vector<NodeSet> out;
  out.reserve(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    NodeSet s;
    for (std::size_t b = 0; b < base.size(); ++b) {
      if (mask & (std::size_t{1} << b)) s.push_back(base[b]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

bool canonical_less(const NodeSet& a, const NodeSet& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

std::vector<NodeSet> union_of_power_sets(const NodeSet& a, const NodeSet& b, bool dedup) {
  std::vector<NodeSet> sets = power_set(a);
  std::vector<NodeSet> more = power_set(b);
  sets.insert(sets.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  std::stable_sort(sets.begin(), sets.end(), canonical_less);
  if (dedup) sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  return sets;
}

bool contains(const NodeSet& s, Node v) { return std::binary_search(s.begin(), s.end(), v); }

NodeSet with(NodeSet s, Node v) {
  s.insert(std::upper_bound(s.begin(), s.end(), v), v);
  return s;
}

NodeSet candidates_of(const MixedGraph& g, const UnshieldedTriple& t) {
  NodeSet out = g.neighbors(t.i);
  const NodeSet nk = g.neighbors(t.k);
  out.insert(out.end(), nk.begin(), nk.end());
  return without(make_node_set(std::move(out)), {t.i, t.k});
}

}  // namespace

std::string_view to_string(DecisionRuleKind rule) {
  switch (rule) {
    case DecisionRuleKind::kSpc: return "SPC";
    case DecisionRuleKind::kMaxPc: return "MaxPC";
    case DecisionRuleKind::kCpc: return "CPC";
    case DecisionRuleKind::kMpc: return "MPC";
    case DecisionRuleKind::kVanilla: return "Vanilla";
  }
  return "?";
}

DecisionRuleKind parse_rule(std::string_view name) {
  for (auto rule : {DecisionRuleKind::kSpc, DecisionRuleKind::kMaxPc, DecisionRuleKind::kCpc,
                    DecisionRuleKind::kMpc, DecisionRuleKind::kVanilla}) {
    if (name == to_string(rule)) return rule;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown decision rule '" + std::string(name) + "'");
}

std::string_view to_string(TieBreak tie_break) {
  return tie_break == TieBreak::kAllMinimizers ? "all-minimizers" : "lowest-index";
}

TieBreak parse_tie_break(std::string_view name) {
  if (name == "all-minimizers") return TieBreak::kAllMinimizers;
  if (name == "lowest-index") return TieBreak::kLowestIndex;
  throw Error(ErrorCode::kInvalidArgument, "unknown tie-break '" + std::string(name) + "'");
}

std::string_view to_string(FamilyMode mode) {
  return mode == FamilyMode::kDeduplicated ? "deduplicated" : "multiset";
}

FamilyMode parse_family_mode(std::string_view name) {
  if (name == "deduplicated") return FamilyMode::kDeduplicated;
  if (name == "multiset") return FamilyMode::kMultiset;
  throw Error(ErrorCode::kInvalidArgument, "unknown coalition family mode '" + std::string(name) + "'");
}

double shapley_weight(std::size_t coalition_size, std::size_t n) {
  if (n == 0) {
    if (coalition_size == 0) return 1.0;
    throw Error(ErrorCode::kInvalidCoalition, "non-empty coalition in an empty game");
  }
  if (coalition_size >= n) {
    throw Error(ErrorCode::kInvalidCoalition, "coalition of size " + std::to_string(coalition_size) +
                                                  " in a game of " + std::to_string(n) + " players");
  }
  // s! (n-s-1)! / n! == 1 / (n * C(n-1, s))
  double binom = 1.0;
  for (std::size_t t = 1; t <= coalition_size; ++t) {
    binom = binom * static_cast<double>(n - 1 - coalition_size + t) / static_cast<double>(t);
  }
  return 1.0 / (static_cast<double>(n) * binom);
}

CoalitionFamily coalition_family(const MixedGraph& skeleton, const UnshieldedTriple& triple,
                                 Node candidate, FamilyMode mode) {
  check_triple(skeleton, triple);
  if (!contains(candidates_of(skeleton, triple), candidate)) {
    throw Error(ErrorCode::kInvalidArgument,
                "node " + std::to_string(candidate) + " is not adjacent to either endpoint");
  }
  const NodeSet from_i = without(skeleton.neighbors(triple.i), {candidate, triple.k});
  const NodeSet from_k = without(skeleton.neighbors(triple.k), {candidate, triple.i});

  CoalitionFamily family;
  family.sets = union_of_power_sets(from_i, from_k, mode == FamilyMode::kDeduplicated);
  NodeSet pool = from_i;
  pool.insert(pool.end(), from_k.begin(), from_k.end());
  family.player_pool = make_node_set(std::move(pool));
  family.n = family.player_pool.size();
  return family;
}

SivEntry siv_entry(const CITester& cit, const MixedGraph& skeleton, const UnshieldedTriple& triple,
                   Node candidate, FamilyMode mode) {
  const CoalitionFamily family = coalition_family(skeleton, triple, candidate, mode);
  SivEntry entry;
  entry.candidate = candidate;
  entry.n = family.n;
  std::vector<double> contributions;
  contributions.reserve(family.sets.size());
  for (const NodeSet& s : family.sets) {
    const double w = shapley_weight(s.size(), family.n + 1);
    const double with_c = cit.test(triple.i, triple.k, with(s, candidate));
    const double without_c = cit.test(triple.i, triple.k, s);
    entry.terms.push_back({s, w, with_c - without_c});
    contributions.push_back(w * (with_c - without_c));
    entry.weight_sum += w;
  }
  // Summing in value order makes phi independent of node labelling.
  std::sort(contributions.begin(), contributions.end());
  for (double c : contributions) entry.phi += c;
  return entry;
}

double siv(const CITester& cit, const MixedGraph& skeleton, const UnshieldedTriple& triple,
           Node candidate, FamilyMode mode) {
  return siv_entry(cit, skeleton, triple, candidate, mode).phi;
}

SivReport spc_decide(const CITester& cit, const MixedGraph& skeleton, const UnshieldedTriple& triple,
                     const RuleOptions& options) {
  check_triple(skeleton, triple);
  SivReport report;
  report.triple = triple;
  double max_abs = 0.0;
  for (Node c : candidates_of(skeleton, triple)) {
    report.entries.push_back(siv_entry(cit, skeleton, triple, c, options.family_mode));
    const SivEntry& e = report.entries.back();
    if (c == triple.j) report.middle_phi = e.phi;
    max_abs = std::max(max_abs, std::abs(e.phi));
  }
  report.min_phi = report.middle_phi;
  for (const auto& e : report.entries) report.min_phi = std::min(report.min_phi, e.phi);

  if (options.siv_threshold) {
    report.decision = report.middle_phi < *options.siv_threshold;
    return report;
  }
  // Relative slack so that re-scaling every p-value keeps the minimizer set.
  const double slack = 1e-12 * max_abs;
  bool attains = report.middle_phi <= report.min_phi + slack;
  if (attains && options.tie_break == TieBreak::kLowestIndex) {
    for (const auto& e : report.entries) {
      if (e.phi <= report.min_phi + slack) {
        attains = e.candidate == triple.j;
        break;
      }
    }
  }
  report.decision = attains && (!options.require_negative_siv || report.middle_phi < 0.0);
  return report;
}

std::vector<NodeSet> endpoint_conditioning_sets(const MixedGraph& skeleton,
                                                const UnshieldedTriple& triple) {
  check_triple(skeleton, triple);
  return union_of_power_sets(without(skeleton.neighbors(triple.i), {triple.k}),
                             without(skeleton.neighbors(triple.k), {triple.i}), true);
}

MaxPcDecision maxpc_decide(const CITester& cit, const MixedGraph& skeleton,
                           const UnshieldedTriple& triple, const RuleOptions& options) {
  const std::vector<NodeSet> sets = endpoint_conditioning_sets(skeleton, triple);
  if (sets.empty()) throw Error(ErrorCode::kEmptyTestSet, "no conditioning sets to test");
  MaxPcDecision out;
  out.max_p = -1.0;
  bool have_with = false;
  bool have_without = false;
  NodeSet best_with;
  NodeSet best_without;
  for (const NodeSet& s : sets) {
    const double p = cit.test(triple.i, triple.k, s);
    if (p > out.max_p) {
      out.max_p = p;
      have_with = have_without = false;
    }
    if (p == out.max_p) {
      if (contains(s, triple.j)) {
        if (!have_with) best_with = s;
        have_with = true;
      } else {
        if (!have_without) best_without = s;
        have_without = true;
      }
    }
  }
  const bool pick_without = have_without && (options.maxpc_prefer_without_middle || !have_with);
  out.decision = pick_without;
  out.best_set = pick_without ? best_without : best_with;
  return out;
}

std::vector<NodeSet> separating_sets(const CITester& cit, const MixedGraph& skeleton,
                                     const UnshieldedTriple& triple, double alpha) {
  std::vector<NodeSet> out;
  for (NodeSet& s : endpoint_conditioning_sets(skeleton, triple)) {
    if (cit.test(triple.i, triple.k, s) >= alpha) out.push_back(std::move(s));
  }
  return out;
}

bool cpc_decide(const std::vector<NodeSet>& sepsets, Node middle) {
  if (sepsets.empty()) return false;
  return std::none_of(sepsets.begin(), sepsets.end(),
                      [&](const NodeSet& s) { return contains(s, middle); });
}

bool mpc_decide(const std::vector<NodeSet>& sepsets, Node middle) {
  if (sepsets.empty()) return false;
  const auto hits = std::count_if(sepsets.begin(), sepsets.end(),
                                  [&](const NodeSet& s) { return contains(s, middle); });
  return 2 * static_cast<std::size_t>(hits) < sepsets.size();
}

std::string to_json_line(const SivReport& report) {
  nlohmann::json j;
  j["triple"] = {report.triple.i, report.triple.j, report.triple.k};
  j["middle_phi"] = report.middle_phi;
  j["min_phi"] = report.min_phi;
  j["decision"] = report.decision;
  auto& entries = j["entries"] = nlohmann::json::array();
  for (const auto& e : report.entries) {
    nlohmann::json je;
    je["candidate"] = e.candidate;
    je["phi"] = e.phi;
    je["n"] = e.n;
    je["weight_sum"] = e.weight_sum;
    auto& terms = je["terms"] = nlohmann::json::array();
    for (const auto& t : e.terms) {
      terms.push_back({{"set", t.set}, {"weight", t.weight}, {"delta", t.delta}});
    }
    entries.push_back(std::move(je));
  }
  return j.dump();
}

}  // namespace spc
