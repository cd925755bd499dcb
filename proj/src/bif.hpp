#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dataset.hpp"
#include "graph.hpp"

namespace spc {

struct DiscreteVariable {
  std::string name;
  std::vector<std::string> states;

  friend bool operator==(const DiscreteVariable&, const DiscreteVariable&) = default;
};

// Discrete Bayesian network. cpts[v] is laid out combination-major: the
// row for a parent-state combination starts at combo * |states(v)|, and
// combinations are enumerated row-major over parents[v] (last parent
// fastest).
struct DiscreteBayesNet {
  std::string name;
  std::vector<DiscreteVariable> variables;
  std::vector<std::vector<Node>> parents;
  std::vector<std::vector<double>> cpts;

  std::size_t num_variables() const { return variables.size(); }
  std::size_t num_combinations(Node v) const;
  // Index of a variable by name; throws kSemantic when absent.
  Node index_of(std::string_view name) const;
  Dag graph() const;

  friend bool operator==(const DiscreteBayesNet&, const DiscreteBayesNet&) = default;
};

struct DiscreteDataset {
  // N x d state indices into the matching variable's state list.
  Eigen::MatrixXi codes;
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> states;
  std::uint64_t seed = 0;
};

DiscreteBayesNet parse_bif(std::string_view text);
DiscreteBayesNet load_bif(const std::string& path);
std::string to_bif(const DiscreteBayesNet& net);

DiscreteDataset sample_bn(const DiscreteBayesNet& net, std::size_t num_samples, std::uint64_t seed);

// States become their rank in lexicographic label order, then every column
// is standardized.
Dataset encode_standardize(const DiscreteDataset& data);

void save_discrete_csv(const std::string& path, const DiscreteDataset& data);

}  // namespace spc
