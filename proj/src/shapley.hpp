#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ci_test.hpp"
#include "graph.hpp"

namespace spc {

enum class DecisionRuleKind { kSpc, kMaxPc, kCpc, kMpc, kVanilla };

std::string_view to_string(DecisionRuleKind rule);
DecisionRuleKind parse_rule(std::string_view name);

// How the two power sets of the endpoint adjacencies are merged.
enum class FamilyMode { kDeduplicated, kMultiset };

// What counts as "attaining the minimum" when several candidates share it.
enum class TieBreak {
  kAllMinimizers,  // the middle fires whenever it is one of the minimizers
  kLowestIndex,    // only the lowest-index minimizer fires
};

// "all-minimizers" / "lowest-index" and "deduplicated" / "multiset".
std::string_view to_string(TieBreak tie_break);
TieBreak parse_tie_break(std::string_view name);
std::string_view to_string(FamilyMode mode);
FamilyMode parse_family_mode(std::string_view name);

struct RuleOptions {
  // Significance level used when CPC/MPC collect separating sets.
  double alpha = kDefaultAlpha;
  // SPC fires only if the middle's SIV is strictly negative.
  bool require_negative_siv = true;
  // When set, SPC fires iff the middle's SIV is below this value,
  // regardless of the other candidates.
  std::optional<double> siv_threshold;
  TieBreak tie_break = TieBreak::kAllMinimizers;
  FamilyMode family_mode = FamilyMode::kDeduplicated;
  // Max-PC: on a tie at the maximal p-value, prefer a set without the middle.
  bool maxpc_prefer_without_middle = true;
};

struct CoalitionFamily {
  // Canonical order: by size, then lexicographically.
  std::vector<NodeSet> sets;
  NodeSet player_pool;
  std::size_t n = 0;  // |player_pool|
};

// |S|! (n - |S| - 1)! / n!, with the n = 0 game fixed to weight 1.
double shapley_weight(std::size_t coalition_size, std::size_t n);

// Subsets of adj(i) \ {candidate, k} together with subsets of
// adj(k) \ {candidate, i}.
CoalitionFamily coalition_family(const MixedGraph& skeleton, const UnshieldedTriple& triple,
                                 Node candidate, FamilyMode mode = FamilyMode::kDeduplicated);

struct CoalitionTerm {
  NodeSet set;
  double weight = 0.0;
  double delta = 0.0;  // I(i, k | S u {c}) - I(i, k | S)
};

struct SivEntry {
  Node candidate = 0;
  double phi = 0.0;
  std::size_t n = 0;
  double weight_sum = 0.0;
  std::vector<CoalitionTerm> terms;
};

// Shapley independence value of `candidate` for the endpoint pair of
// `triple`. The candidate joins the pool as the extra player, so each
// coalition S is weighted by shapley_weight(|S|, n + 1).
SivEntry siv_entry(const CITester& cit, const MixedGraph& skeleton, const UnshieldedTriple& triple,
                   Node candidate, FamilyMode mode = FamilyMode::kDeduplicated);

double siv(const CITester& cit, const MixedGraph& skeleton, const UnshieldedTriple& triple,
           Node candidate, FamilyMode mode = FamilyMode::kDeduplicated);

struct SivReport {
  UnshieldedTriple triple{};
  std::vector<SivEntry> entries;  // one per candidate, ascending candidate index
  double middle_phi = 0.0;
  double min_phi = 0.0;
  bool decision = false;
};

// Candidates are adj(i) u adj(k) \ {i, k}; the middle is always among them.
SivReport spc_decide(const CITester& cit, const MixedGraph& skeleton, const UnshieldedTriple& triple,
                     const RuleOptions& options = {});

struct MaxPcDecision {
  bool decision = false;
  double max_p = 0.0;
  NodeSet best_set;
};

MaxPcDecision maxpc_decide(const CITester& cit, const MixedGraph& skeleton,
                           const UnshieldedTriple& triple, const RuleOptions& options = {});

// Subsets of adj(i) \ {k} and adj(k) \ {i} (these may contain the middle).
std::vector<NodeSet> endpoint_conditioning_sets(const MixedGraph& skeleton,
                                                const UnshieldedTriple& triple);

// All sets from endpoint_conditioning_sets() with p(i, k | S) >= alpha.
std::vector<NodeSet> separating_sets(const CITester& cit, const MixedGraph& skeleton,
                                     const UnshieldedTriple& triple, double alpha);

// No separating set at all means the triple is ambiguous: both return false.
bool cpc_decide(const std::vector<NodeSet>& sepsets, Node middle);
bool mpc_decide(const std::vector<NodeSet>& sepsets, Node middle);

// One JSON object per line, for the diagnostic stream.
std::string to_json_line(const SivReport& report);

}  // namespace spc
