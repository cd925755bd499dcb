#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "graph.hpp"

namespace spc {

struct ConfusionCounts {
  std::size_t tp = 0;        // estimated edges with the right mark
  std::size_t fp = 0;        // estimated edges outside the true skeleton
  std::size_t tn = 0;        // true non-edges left out
  std::size_t fn = 0;        // true edges not recovered with the right mark
  std::size_t reversed = 0;  // right adjacency, wrong mark
  std::size_t extra = 0;
  std::size_t missing = 0;
  std::size_t true_edges = 0;       // T
  std::size_t true_non_edges = 0;   // F = C(|V|, 2) - T
  std::size_t predicted_edges = 0;  // P

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Undefined rates (zero denominators) are NaN.
struct Rates {
  double precision = 0.0;
  double recall = 0.0;
  double fdr = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

struct MetricRow {
  std::size_t shd = 0;
  double nshd = 0.0;
  std::size_t sid = 0;
  double nsid = 0.0;
  Rates rates;
  std::size_t egs = 0;
  ConfusionCounts counts;
};

// Undirected edges count as missing: drop them, keep directed ones.
MixedGraph penalize_undirected(const MixedGraph& est);

// Compares marks pair by pair. With a DAG as truth this is the usual
// directed-edge confusion; with a CPDAG it compares equivalence classes.
ConfusionCounts confusion(const MixedGraph& est, const MixedGraph& truth);
ConfusionCounts confusion(const MixedGraph& est_directed, const Dag& truth);

std::size_t shd(const ConfusionCounts& counts);
double normalized_shd(const ConfusionCounts& counts);

Rates rates(const ConfusionCounts& counts);

// Number of ordered pairs (i, j) for which adjusting for the estimated
// parents of i does not identify the effect of i on j in the truth.
std::size_t sid(const MixedGraph& est_directed, const Dag& truth);

// Whether `adjustment` is a valid adjustment set for (i, j) in g.
bool valid_adjustment(const Dag& g, Node i, Node j, const NodeSet& adjustment);

double saturation(std::size_t num_nodes, double density);

// Full protocol: penalize undirected edges, then compare with the DAG.
MetricRow evaluate(const MixedGraph& est, const Dag& truth);
// Mark-level comparison with dag_to_cpdag(truth); SID still uses the
// penalized estimate against the DAG.
MetricRow evaluate_against_cpdag(const MixedGraph& est, const Dag& truth);

// Fixed column order shared by the CSV writers.
const std::vector<std::string>& metric_columns();
std::vector<std::string> metric_values(const MetricRow& row);
std::string format_real(double value);

}  // namespace spc
