#include "dgp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "errors.hpp"

namespace spc {

namespace {

constexpr double kGpJitter = 1e-8;
constexpr double kVarianceTie = 1e-9;

Eigen::VectorXd draw_noise(NoiseKind kind, std::size_t n, Rng& rng) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(n));
  switch (kind) {
    case NoiseKind::kGauss: {
      std::normal_distribution<double> dist(0.0, 1.0);
      for (auto& v : out) v = dist(rng);
      break;
    }
    case NoiseKind::kExp: {
      std::exponential_distribution<double> dist(1.0);
      for (auto& v : out) v = dist(rng);
      break;
    }
    case NoiseKind::kGumbel: {
      std::extreme_value_distribution<double> dist(0.0, 1.0);
      for (auto& v : out) v = dist(rng);
      break;
    }
    case NoiseKind::kUniform: {
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      for (auto& v : out) v = dist(rng);
      break;
    }
  }
  return out;
}

// Uniform on [-2, -0.5] u [0.5, 2].
double signed_coefficient(Rng& rng) {
  std::uniform_real_distribution<double> magnitude(0.5, 2.0);
  std::bernoulli_distribution negative(0.5);
  const double m = magnitude(rng);
  return negative(rng) ? -m : m;
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& values, const NodeSet& cols) {
  Eigen::MatrixXd out(values.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    out.col(static_cast<Eigen::Index>(c)) = values.col(static_cast<Eigen::Index>(cols[c]));
  }
  return out;
}

std::vector<std::string> default_names(std::size_t d) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < d; ++c) names.push_back("X" + std::to_string(c));
  return names;
}

double population_variance(const Eigen::VectorXd& col) {
  const double mean = col.mean();
  return (col.array() - mean).square().mean();
}

}  // namespace

std::string to_string(const SemSpec& sem) {
  if (sem.linear) {
    switch (sem.noise) {
      case NoiseKind::kGauss: return "linear-gauss";
      case NoiseKind::kExp: return "linear-exp";
      case NoiseKind::kGumbel: return "linear-gumbel";
      case NoiseKind::kUniform: return "linear-uniform";
    }
  }
  switch (sem.nonlinear) {
    case NonlinearKind::kMlp: return "mlp";
    case NonlinearKind::kMim: return "mim";
    case NonlinearKind::kGp: return "gp";
    case NonlinearKind::kGpAdd: return "gp-add";
  }
  return "?";
}

SemSpec parse_sem(std::string_view name) {
  static const SemSpec all[] = {
      {true, NoiseKind::kGauss, NonlinearKind::kMlp},   {true, NoiseKind::kExp, NonlinearKind::kMlp},
      {true, NoiseKind::kGumbel, NonlinearKind::kMlp},  {true, NoiseKind::kUniform, NonlinearKind::kMlp},
      {false, NoiseKind::kGauss, NonlinearKind::kMlp},  {false, NoiseKind::kGauss, NonlinearKind::kMim},
      {false, NoiseKind::kGauss, NonlinearKind::kGp},   {false, NoiseKind::kGauss, NonlinearKind::kGpAdd},
  };
  for (const auto& sem : all) {
    if (to_string(sem) == name) return sem;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown SEM '" + std::string(name) + "'");
}

std::string_view sem_class(const SemSpec& sem) { return sem.linear ? "linear" : "nonlinear"; }

Dag er_dag_with_edges(std::size_t num_nodes, std::size_t num_edges, std::uint64_t seed) {
  const std::size_t max_edges = num_nodes * (num_nodes > 0 ? num_nodes - 1 : 0) / 2;
  if (num_edges > max_edges) {
    throw Error(ErrorCode::kTooDense, std::to_string(num_edges) + " edges exceed the " +
                                          std::to_string(max_edges) + " possible in a DAG of " +
                                          std::to_string(num_nodes) + " nodes");
  }
  Rng rng(seed);
  std::vector<Node> order(num_nodes);
  std::iota(order.begin(), order.end(), Node{0});
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::pair<std::size_t, std::size_t>> slots;
  slots.reserve(max_edges);
  for (std::size_t a = 0; a < num_nodes; ++a) {
    for (std::size_t b = a + 1; b < num_nodes; ++b) slots.emplace_back(a, b);
  }
  // Partial Fisher-Yates: the first num_edges slots are a uniform sample.
  for (std::size_t t = 0; t < num_edges; ++t) {
    std::uniform_int_distribution<std::size_t> pick(t, slots.size() - 1);
    std::swap(slots[t], slots[pick(rng)]);
  }
  std::vector<std::pair<Node, Node>> edges;
  for (std::size_t t = 0; t < num_edges; ++t) {
    edges.emplace_back(order[slots[t].first], order[slots[t].second]);
  }
  std::sort(edges.begin(), edges.end());
  return build_dag(num_nodes, edges);
}

Dag er_dag(std::size_t num_nodes, double density, std::uint64_t seed) {
  if (!(density >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "density must be non-negative");
  const double target = static_cast<double>(num_nodes) * density;
  const double rounded = std::round(target);
  if (std::abs(target - rounded) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "|V| * d must be a whole number of edges");
  }
  return er_dag_with_edges(num_nodes, static_cast<std::size_t>(rounded), seed);
}

LinearSemParams random_linear_params(const Dag& g, NoiseKind noise, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(g.num_nodes());
  LinearSemParams params{Eigen::MatrixXd::Zero(d, d), noise};
  for (const auto& [from, to] : g.edges()) {
    params.weights(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to)) = signed_coefficient(rng);
  }
  return params;
}

Dataset simulate_linear_with(const Dag& g, const LinearSemParams& params, std::size_t num_samples,
                             std::uint64_t seed) {
  Rng rng(seed);
  const auto d = static_cast<Eigen::Index>(g.num_nodes());
  if (params.weights.rows() != d || params.weights.cols() != d) {
    throw Error(ErrorCode::kInvalidArgument, "weight matrix does not match the graph");
  }
  if (num_samples == 0) throw Error(ErrorCode::kInvalidArgument, "need at least one sample");
  Dataset ds;
  ds.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_samples), d);
  ds.names = default_names(g.num_nodes());
  ds.seed = seed;
  for (Node v : topological_order(g)) {
    const auto c = static_cast<Eigen::Index>(v);
    Eigen::VectorXd col = draw_noise(params.noise, num_samples, rng);
    for (Node p : g.parents(v)) {
      col += params.weights(static_cast<Eigen::Index>(p), c) * ds.values.col(static_cast<Eigen::Index>(p));
    }
    ds.values.col(c) = col;
  }
  return ds;
}

std::pair<Dataset, LinearSemParams> simulate_linear(const Dag& g, NoiseKind noise,
                                                    std::size_t num_samples, std::uint64_t seed) {
  // Weights and noise use separate streams so fixing one does not shift
  // the other.
  Rng weight_rng(seed ^ 0xA5A5A5A5A5A5A5A5ULL);
  LinearSemParams params = random_linear_params(g, noise, weight_rng);
  Dataset ds = simulate_linear_with(g, params, num_samples, seed);
  return {std::move(ds), std::move(params)};
}

Eigen::VectorXd mixed_index_function(const Eigen::MatrixXd& parent_values, const Eigen::MatrixXd& theta) {
  if (theta.rows() != 3 || theta.cols() != parent_values.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "theta must be 3 x |parents|");
  }
  const Eigen::VectorXd a = parent_values * theta.row(0).transpose();
  const Eigen::VectorXd b = parent_values * theta.row(1).transpose();
  const Eigen::VectorXd c = parent_values * theta.row(2).transpose();
  return a.array().tanh() + b.array().cos() + c.array().sin();
}

Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& inputs) {
  const Eigen::Index n = inputs.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    k(a, a) = 1.0;
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const double sq = (inputs.row(a) - inputs.row(b)).squaredNorm();
      k(a, b) = k(b, a) = std::exp(-0.5 * sq);
    }
  }
  return k;
}

Eigen::VectorXd gp_draw(const Eigen::MatrixXd& inputs, Rng& rng) {
  const Eigen::Index n = inputs.rows();
  Eigen::MatrixXd k = rbf_kernel(inputs);
  k.diagonal().array() += kGpJitter;
  Eigen::VectorXd z(n);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (auto& v : z) v = dist(rng);

  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() == Eigen::Success) return llt.matrixL() * z;
  // Nearly duplicate inputs can defeat the jitter; fall back to a clipped
  // eigendecomposition.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.cwiseProduct(z);
}

Dataset simulate_nonlinear(const Dag& g, NonlinearKind kind, std::size_t num_samples,
                           std::uint64_t seed, const NonlinearOptions& options) {
  if (num_samples == 0) throw Error(ErrorCode::kInvalidArgument, "need at least one sample");
  const bool is_gp = kind == NonlinearKind::kGp || kind == NonlinearKind::kGpAdd;
  if (is_gp && num_samples > options.gp_sample_cap && g.num_edges() > 0) {
    throw Error(ErrorCode::kSampleCapExceeded,
                "GP sampling is capped at " + std::to_string(options.gp_sample_cap) + " samples");
  }
  Rng rng(seed);
  const auto d = static_cast<Eigen::Index>(g.num_nodes());
  const auto n = static_cast<Eigen::Index>(num_samples);
  Dataset ds;
  ds.values = Eigen::MatrixXd::Zero(n, d);
  ds.names = default_names(g.num_nodes());
  ds.seed = seed;

  for (Node v : topological_order(g)) {
    const NodeSet& parents = g.parents(v);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    if (!parents.empty()) {
      const Eigen::MatrixXd x = gather_columns(ds.values, parents);
      const auto k = x.cols();
      switch (kind) {
        case NonlinearKind::kMlp: {
          const auto hidden = static_cast<Eigen::Index>(options.mlp_hidden_units);
          std::uniform_real_distribution<double> w(-options.mlp_weight_scale, options.mlp_weight_scale);
          Eigen::MatrixXd w1(k, hidden);
          for (auto& value : w1.reshaped()) value = w(rng);
          Eigen::VectorXd w2(hidden);
          for (auto& value : w2) value = w(rng);
          const Eigen::MatrixXd h = (1.0 / (1.0 + (-(x * w1)).array().exp())).matrix();
          f = h * w2;
          break;
        }
        case NonlinearKind::kMim: {
          Eigen::MatrixXd theta(3, k);
          for (auto& value : theta.reshaped()) value = signed_coefficient(rng);
          f = mixed_index_function(x, theta);
          break;
        }
        case NonlinearKind::kGp:
          f = gp_draw(x, rng);
          break;
        case NonlinearKind::kGpAdd:
          for (Eigen::Index c = 0; c < k; ++c) f += gp_draw(x.col(c), rng);
          break;
      }
    }
    ds.values.col(static_cast<Eigen::Index>(v)) = f + draw_noise(NoiseKind::kGauss, num_samples, rng);
  }
  return ds;
}

Dataset simulate(const Dag& g, const SemSpec& sem, std::size_t num_samples, std::uint64_t seed) {
  if (sem.linear) return simulate_linear(g, sem.noise, num_samples, seed).first;
  return simulate_nonlinear(g, sem.nonlinear, num_samples, seed);
}

Dataset standardize(const Dataset& ds) {
  Dataset out = ds;
  for (Eigen::Index c = 0; c < ds.values.cols(); ++c) {
    const double mean = ds.values.col(c).mean();
    const double sd = std::sqrt((ds.values.col(c).array() - mean).square().mean());
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      throw Error(ErrorCode::kDegenerateColumn, "column " + std::to_string(c) + " is constant");
    }
    out.values.col(c) = (ds.values.col(c).array() - mean) / sd;
  }
  return out;
}

double varsortability(const Dataset& ds, const Dag& g) {
  if (ds.num_variables() != g.num_nodes()) {
    throw Error(ErrorCode::kNodeCountMismatch, "dataset and graph disagree on the variable count");
  }
  std::vector<double> var(g.num_nodes());
  for (Node v = 0; v < g.num_nodes(); ++v) var[v] = population_variance(ds.values.col(static_cast<Eigen::Index>(v)));
  double score = 0.0;
  std::size_t pairs = 0;
  for (Node a = 0; a < g.num_nodes(); ++a) {
    const std::vector<bool> desc = g.descendants(a);
    for (Node b = 0; b < g.num_nodes(); ++b) {
      if (b == a || !desc[b]) continue;
      ++pairs;
      const double diff = var[b] - var[a];
      if (std::abs(diff) <= kVarianceTie) {
        score += 0.5;
      } else if (diff > 0.0) {
        score += 1.0;
      }
    }
  }
  if (pairs == 0) throw Error(ErrorCode::kNoPaths, "graph has no directed paths");
  return score / static_cast<double>(pairs);
}

}  // namespace spc
