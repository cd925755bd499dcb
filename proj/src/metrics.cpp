#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "errors.hpp"

namespace spc {

namespace {

constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? kUndefined : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MixedGraph penalize_undirected(const MixedGraph& est) {
  MixedGraph out(est.num_nodes());
  for (const auto& e : est.edges()) {
    if (e.directed) out.set_directed(e.from, e.to);
  }
  return out;
}

ConfusionCounts confusion(const MixedGraph& est, const MixedGraph& truth) {
  if (est.num_nodes() != truth.num_nodes()) {
    throw Error(ErrorCode::kNodeCountMismatch, "estimate has " + std::to_string(est.num_nodes()) +
                                                   " nodes, truth has " + std::to_string(truth.num_nodes()));
  }
  const std::size_t n = est.num_nodes();
  ConfusionCounts c;
  for (Node a = 0; a < n; ++a) {
    for (Node b = a + 1; b < n; ++b) {
      const bool in_est = est.adjacent(a, b);
      const bool in_truth = truth.adjacent(a, b);
      if (in_truth) ++c.true_edges;
      if (in_est) ++c.predicted_edges;
      if (in_est && in_truth) {
        if (est.mark(a, b) == truth.mark(a, b)) {
          ++c.tp;
        } else {
          ++c.reversed;
        }
      } else if (in_est) {
        ++c.extra;
      } else if (in_truth) {
        ++c.missing;
      }
    }
  }
  c.fp = c.extra;
  c.fn = c.true_edges - c.tp;
  c.true_non_edges = n * (n > 0 ? n - 1 : 0) / 2 - c.true_edges;
  c.tn = c.true_non_edges - c.fp;
  return c;
}

ConfusionCounts confusion(const MixedGraph& est_directed, const Dag& truth) {
  return confusion(est_directed, truth.to_mixed());
}

std::size_t shd(const ConfusionCounts& counts) { return counts.extra + counts.missing + counts.reversed; }

double normalized_shd(const ConfusionCounts& counts) {
  if (counts.true_edges == 0) {
    throw Error(ErrorCode::kDivisionByZero, "normalized SHD is undefined for an edgeless truth");
  }
  return static_cast<double>(shd(counts)) / static_cast<double>(counts.true_edges);
}

Rates rates(const ConfusionCounts& c) {
  Rates r;
  r.precision = ratio(c.tp, c.tp + c.fp);
  r.recall = ratio(c.tp, c.tp + c.fn);
  r.fdr = ratio(c.reversed + c.fp, c.predicted_edges);
  r.tpr = ratio(c.tp, c.true_edges);
  r.fpr = ratio(c.reversed + c.fp, c.true_non_edges);
  return r;
}

bool valid_adjustment(const Dag& g, Node i, Node j, const NodeSet& adjustment) {
  const std::size_t n = g.num_nodes();
  if (i >= n || j >= n) throw Error(ErrorCode::kIndex, "node out of range");
  if (std::binary_search(adjustment.begin(), adjustment.end(), j) ||
      std::binary_search(adjustment.begin(), adjustment.end(), i)) {
    return false;
  }
  // Nodes (other than i) on directed paths from i to j.
  const std::vector<bool> desc_i = g.descendants(i);
  const std::vector<bool> anc_j = g.ancestors_of({j});
  std::vector<bool> forbidden(n, false);
  std::vector<Node> causal;
  for (Node w = 0; w < n; ++w) {
    if (w != i && desc_i[w] && anc_j[w]) causal.push_back(w);
  }
  for (Node w : causal) {
    const std::vector<bool> dw = g.descendants(w);
    for (Node v = 0; v < n; ++v) forbidden[v] = forbidden[v] || dw[v];
  }
  for (Node z : adjustment) {
    if (forbidden[z]) return false;
  }
  // Proper back-door graph: drop the first edge of every causal path.
  std::vector<std::pair<Node, Node>> kept;
  for (const auto& [from, to] : g.edges()) {
    const bool first_causal_edge = from == i && desc_i[to] && anc_j[to];
    if (!first_causal_edge) kept.emplace_back(from, to);
  }
  return d_separated(build_dag(n, kept), i, j, adjustment);
}

std::size_t sid(const MixedGraph& est_directed, const Dag& truth) {
  if (est_directed.num_nodes() != truth.num_nodes()) {
    throw Error(ErrorCode::kNodeCountMismatch, "estimate and truth differ in node count");
  }
  const std::size_t n = truth.num_nodes();
  std::size_t count = 0;
  for (Node i = 0; i < n; ++i) {
    for (Node v = 0; v < n; ++v) {
      if (v != i && est_directed.is_undirected(i, v)) {
        throw Error(ErrorCode::kInvalidArgument, "SID needs a fully directed estimate");
      }
    }
    const NodeSet z = est_directed.parents(i);
    const std::vector<bool> desc_i = truth.descendants(i);
    for (Node j = 0; j < n; ++j) {
      if (j == i) continue;
      bool correct;
      if (std::binary_search(z.begin(), z.end(), j)) {
        // The estimate claims i has no effect on its own parent j.
        correct = !desc_i[j];
      } else {
        correct = valid_adjustment(truth, i, j, z);
      }
      if (!correct) ++count;
    }
  }
  return count;
}

double saturation(std::size_t num_nodes, double density) {
  if (num_nodes < 2) throw Error(ErrorCode::kInvalidArgument, "saturation needs at least 2 nodes");
  const double v = static_cast<double>(num_nodes);
  return 2.0 * v * density / (v * (v - 1.0));
}

namespace {

MetricRow finish_row(const ConfusionCounts& counts, std::size_t sid_value, std::size_t num_nodes) {
  MetricRow row;
  row.counts = counts;
  row.shd = shd(counts);
  row.nshd = counts.true_edges == 0 ? kUndefined : normalized_shd(counts);
  row.sid = sid_value;
  row.nsid = num_nodes < 2 ? kUndefined
                           : static_cast<double>(sid_value) / static_cast<double>(num_nodes * (num_nodes - 1));
  row.rates = rates(counts);
  row.egs = counts.predicted_edges;
  return row;
}

}  // namespace

MetricRow evaluate(const MixedGraph& est, const Dag& truth) {
  const MixedGraph directed = penalize_undirected(est);
  return finish_row(confusion(directed, truth), sid(directed, truth), truth.num_nodes());
}

MetricRow evaluate_against_cpdag(const MixedGraph& est, const Dag& truth) {
  const MixedGraph directed = penalize_undirected(est);
  return finish_row(confusion(est, dag_to_cpdag(truth)), sid(directed, truth), truth.num_nodes());
}

const std::vector<std::string>& metric_columns() {
  static const std::vector<std::string> columns = {
      "shd", "nshd", "sid", "nsid", "precision", "recall", "fdr", "tpr", "fpr", "egs",
      "tp",  "fp",   "tn",  "fn",   "reversed",  "extra",  "missing"};
  return columns;
}

std::string format_real(double value) {
  if (std::isnan(value)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

std::vector<std::string> metric_values(const MetricRow& row) {
  const auto& c = row.counts;
  return {std::to_string(row.shd),       format_real(row.nshd),         std::to_string(row.sid),
          format_real(row.nsid),         format_real(row.rates.precision), format_real(row.rates.recall),
          format_real(row.rates.fdr),    format_real(row.rates.tpr),    format_real(row.rates.fpr),
          std::to_string(row.egs),       std::to_string(c.tp),          std::to_string(c.fp),
          std::to_string(c.tn),          std::to_string(c.fn),          std::to_string(c.reversed),
          std::to_string(c.extra),       std::to_string(c.missing)};
}

}  // namespace spc
