#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "metrics.hpp"

namespace spc {

// Sweep description. Every list axis is crossed with the others; a JSON
// scalar counts as a one-element list.
struct ExperimentConfig {
  std::vector<std::size_t> nodes{10};
  std::vector<double> densities{1.0};
  std::vector<std::string> sems{"linear-gauss"};
  // Proportional sample size: N = s * |V|.
  std::vector<std::size_t> s{50};
  std::vector<double> alphas{0.01};
  // SPC, MaxPC, CPC, MPC, Vanilla or Random.
  std::vector<std::string> rules{"SPC"};
  std::size_t replicates = 10;
  std::uint64_t seed = 0;
  bool oracle = false;
  std::size_t workers = 1;
  bool require_negative_siv = true;
  std::string tie_break = "all-minimizers";
  std::string family_mode = "deduplicated";
  std::optional<double> siv_threshold;
  // Edge-list file of a fixed true DAG; replaces the random graphs.
  std::string graph;
  // BIF network; replaces graph generation and the SEM.
  std::string bif;
  std::size_t bif_samples = 2000;
  // When set, truth_<config>_<rep>.txt and est_<config>_<rep>.txt go here.
  std::string graphs_dir;
};

// Unknown keys and ill-typed values throw kConfig.
ExperimentConfig config_from_json(const nlohmann::json& doc);
// Applies the keys of `doc` on top of `base`.
ExperimentConfig merge_config(ExperimentConfig base, const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& config);
void validate(const ExperimentConfig& config);

struct ResultRecord {
  std::size_t config_id = 0;
  std::size_t nodes = 0;
  double density = 0.0;
  std::string sem;
  std::optional<std::size_t> s;  // absent for BIF data
  std::size_t n_samples = 0;
  double alpha = 0.0;
  std::string rule;
  bool oracle = false;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::size_t true_edges = 0;
  double zeta = 0.0;
  bool ok = false;
  MetricRow metrics;
  std::size_t num_tests = 0;
  double elapsed_s = 0.0;
  std::string error;
};

// Seeds used for one replicate. Independent of the rule, so every rule of
// a sweep sees the same graph and the same data.
struct ReplicateSeeds {
  std::uint64_t replicate;
  std::uint64_t graph;
  std::uint64_t data;
  std::uint64_t baseline;
};
ReplicateSeeds replicate_seeds(std::uint64_t base_seed, std::size_t replicate);

// Runs every (config cell, replicate) pair. Per-replicate failures are
// recorded in the row; setup failures (bad config, unreadable BIF) throw.
std::vector<ResultRecord> run_suite(const ExperimentConfig& config);

std::vector<ResultRecord> bif_suite(const std::string& bif_path, std::size_t num_samples,
                                    const std::vector<std::string>& rules, std::uint64_t seed,
                                    std::size_t replicates = 1, double alpha = 0.01);

const std::vector<std::string>& result_columns();
void write_results_csv(std::ostream& out, const std::vector<ResultRecord>& records);
void write_results_json(std::ostream& out, const std::vector<ResultRecord>& records);

// Header plus rows of cells, as read back from a results CSV.
struct ResultTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
ResultTable to_table(const std::vector<ResultRecord>& records);
ResultTable read_results_csv(std::istream& in);

const std::vector<std::string>& default_group_keys();
// Mean and sample standard deviation of every metric per group. Groups
// appear in order of first occurrence. Rows with an error are skipped.
void emit_plot_data(const ResultTable& table, const std::vector<std::string>& keys, std::ostream& out);

}  // namespace spc
