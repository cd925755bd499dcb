#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "dataset.hpp"
#include "graph.hpp"

namespace spc {

using Rng = std::mt19937_64;

enum class NoiseKind { kGauss, kExp, kGumbel, kUniform };
enum class NonlinearKind { kMlp, kMim, kGp, kGpAdd };

// One of the eight structural equation families, named "linear-gauss",
// "linear-exp", "linear-gumbel", "linear-uniform", "mlp", "mim", "gp",
// "gp-add".
struct SemSpec {
  bool linear = true;
  NoiseKind noise = NoiseKind::kGauss;
  NonlinearKind nonlinear = NonlinearKind::kMlp;

  friend bool operator==(const SemSpec&, const SemSpec&) = default;
};

std::string to_string(const SemSpec& sem);
SemSpec parse_sem(std::string_view name);
// "linear" or "nonlinear".
std::string_view sem_class(const SemSpec& sem);

struct LinearSemParams {
  // weights(p, c) != 0 iff p -> c.
  Eigen::MatrixXd weights;
  NoiseKind noise = NoiseKind::kGauss;
};

struct NonlinearOptions {
  std::size_t gp_sample_cap = 5000;
  std::size_t mlp_hidden_units = 100;
  // MLP weights are drawn from U(-scale, scale).
  double mlp_weight_scale = 1.0;
};

// Erdos-Renyi DAG with exactly round(num_nodes * density) edges, oriented
// along a uniformly random order.
Dag er_dag(std::size_t num_nodes, double density, std::uint64_t seed);
Dag er_dag_with_edges(std::size_t num_nodes, std::size_t num_edges, std::uint64_t seed);

// Edge weights with magnitude U(0.5, 2) and a random sign.
LinearSemParams random_linear_params(const Dag& g, NoiseKind noise, Rng& rng);

std::pair<Dataset, LinearSemParams> simulate_linear(const Dag& g, NoiseKind noise,
                                                    std::size_t num_samples, std::uint64_t seed);
Dataset simulate_linear_with(const Dag& g, const LinearSemParams& params, std::size_t num_samples,
                             std::uint64_t seed);

Dataset simulate_nonlinear(const Dag& g, NonlinearKind kind, std::size_t num_samples,
                           std::uint64_t seed, const NonlinearOptions& options = {});

Dataset simulate(const Dag& g, const SemSpec& sem, std::size_t num_samples, std::uint64_t seed);

// tanh(theta_0 . x) + cos(theta_1 . x) + sin(theta_2 . x), row-wise;
// theta is 3 x |parents|.
Eigen::VectorXd mixed_index_function(const Eigen::MatrixXd& parent_values, const Eigen::MatrixXd& theta);

// One draw of f ~ GP(0, RBF(length-scale 1)) at the rows of `inputs`.
Eigen::VectorXd gp_draw(const Eigen::MatrixXd& inputs, Rng& rng);
Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& inputs);

// Column-wise mean 0 and standard deviation 1 (denominator N).
Dataset standardize(const Dataset& ds);

// Share of ancestor/descendant pairs whose variance increases along the
// causal direction; ties within 1e-9 count one half.
double varsortability(const Dataset& ds, const Dag& g);

}  // namespace spc
