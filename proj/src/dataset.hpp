#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace spc {

// Numeric sample matrix, one row per observation.
struct Dataset {
  Eigen::MatrixXd values;
  std::vector<std::string> names;
  std::uint64_t seed = 0;

  std::size_t num_samples() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t num_variables() const { return static_cast<std::size_t>(values.cols()); }
};

// Headerless CSV, 17 significant digits so values round-trip exactly.
void save_dataset_csv(const std::string& path, const Dataset& ds);
Dataset load_dataset_csv(const std::string& path);

}  // namespace spc
