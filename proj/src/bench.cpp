#include "bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "bif.hpp"
#include "ci_test.hpp"
#include "dgp.hpp"
#include "errors.hpp"
#include "pc.hpp"

namespace spc {

namespace {

using json = nlohmann::json;

constexpr const char* kRandomRule = "Random";

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::kConfig, msg); }

template <typename T>
std::vector<T> list_of(const json& value, const std::string& key) {
  try {
    if (value.is_array()) {
      if (value.empty()) config_error("'" + key + "' must not be an empty list");
      return value.get<std::vector<T>>();
    }
    return {value.get<T>()};
  } catch (const json::exception& e) {
    config_error("bad value for '" + key + "': " + e.what());
  }
}

template <typename T>
T scalar_of(const json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const json::exception& e) {
    config_error("bad value for '" + key + "': " + e.what());
  }
}

bool is_rule_name(const std::string& name) {
  if (name == kRandomRule) return true;
  try {
    (void)parse_rule(name);
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::string sanitize(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  }
  return text;
}

std::string format_fixed(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

json real_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

// One data-generating cell: everything but alpha and the rule.
struct DataCell {
  std::size_t nodes = 0;
  double density = 0.0;
  std::string sem;
  std::optional<std::size_t> s;
};

struct Cell {
  std::size_t config_id;
  double alpha;
  std::string rule;
};

struct Job {
  DataCell data;
  std::vector<Cell> cells;
  std::size_t replicate;
};

struct Shared {
  const ExperimentConfig* config = nullptr;
  std::optional<DiscreteBayesNet> net;
  std::optional<Dag> fixed_graph;
};

// Sample count of the rows of one job (they share it).
std::size_t row_samples(const std::vector<ResultRecord>& rows) { return rows.empty() ? 0 : rows.front().n_samples; }

void fill_metrics(ResultRecord& row, const MixedGraph& est, const Dag& truth, bool cpdag_target) {
  row.metrics = cpdag_target ? evaluate_against_cpdag(est, truth) : evaluate(est, truth);
  row.ok = true;
}

std::vector<ResultRecord> run_job(const Job& job, const Shared& shared) {
  const ExperimentConfig& cfg = *shared.config;
  const ReplicateSeeds seeds = replicate_seeds(cfg.seed, job.replicate);

  std::vector<ResultRecord> rows;
  for (const Cell& cell : job.cells) {
    ResultRecord row;
    row.config_id = cell.config_id;
    row.nodes = job.data.nodes;
    row.density = job.data.density;
    row.sem = job.data.sem;
    row.s = job.data.s;
    row.n_samples = shared.net ? cfg.bif_samples : job.data.s.value_or(0) * job.data.nodes;
    row.alpha = cell.alpha;
    row.rule = cell.rule;
    row.oracle = cfg.oracle;
    row.replicate = job.replicate;
    row.seed = seeds.replicate;
    rows.push_back(std::move(row));
  }
  auto fail_all = [&](const std::string& msg) {
    for (auto& row : rows) {
      if (!row.ok && row.error.empty()) row.error = sanitize(msg);
    }
  };

  Dag truth;
  try {
    if (shared.net) {
      truth = shared.net->graph();
    } else if (shared.fixed_graph) {
      truth = *shared.fixed_graph;
    } else {
      truth = er_dag(job.data.nodes, job.data.density, seeds.graph);
    }
  } catch (const std::exception& e) {
    fail_all(e.what());
    return rows;
  }
  for (auto& row : rows) {
    row.true_edges = truth.num_edges();
    row.zeta = truth.num_nodes() >= 2 ? saturation(truth.num_nodes(), row.density) : std::nan("");
  }

  // The tester is shared by all PC-family rules of this replicate.
  std::unique_ptr<CITester> tester;
  std::string data_error;
  const bool needs_tester = std::any_of(job.cells.begin(), job.cells.end(),
                                        [](const Cell& c) { return c.rule != kRandomRule; });
  if (needs_tester) {
    try {
      if (cfg.oracle) {
        tester = std::make_unique<OracleTest>(truth);
      } else if (shared.net) {
        tester = std::make_unique<FisherZTest>(
            encode_standardize(sample_bn(*shared.net, cfg.bif_samples, seeds.data)));
      } else {
        const Dataset raw = simulate(truth, parse_sem(job.data.sem), row_samples(rows), seeds.data);
        tester = std::make_unique<FisherZTest>(standardize(raw));
      }
    } catch (const std::exception& e) {
      data_error = e.what();
    }
  }

  for (ResultRecord& row : rows) {
    try {
      MixedGraph est;
      if (row.rule == kRandomRule) {
        est = er_dag_with_edges(truth.num_nodes(), truth.num_edges(), seeds.baseline).to_mixed();
      } else {
        if (!tester) throw Error(ErrorCode::kInternal, data_error);
        PcOptions opts;
        opts.alpha = row.alpha;
        opts.rule = parse_rule(row.rule);
        opts.rule_options.require_negative_siv = cfg.require_negative_siv;
        opts.rule_options.siv_threshold = cfg.siv_threshold;
        opts.rule_options.tie_break = parse_tie_break(cfg.tie_break);
        opts.rule_options.family_mode = parse_family_mode(cfg.family_mode);
        opts.workers = 1;
        PcRunResult result = run_pc(*tester, opts);
        est = std::move(result.cpdag);
        row.num_tests = result.num_tests;
        row.elapsed_s = result.elapsed.count();
      }
      fill_metrics(row, est, truth, cfg.oracle);
      if (!cfg.graphs_dir.empty()) {
        const std::string tag = std::to_string(row.config_id) + "_" + std::to_string(row.replicate) + ".txt";
        const std::filesystem::path dir(cfg.graphs_dir);
        save_graph((dir / ("truth_" + tag)).string(), truth.to_mixed());
        save_graph((dir / ("est_" + tag)).string(), est);
      }
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = sanitize(e.what());
    }
  }
  return rows;
}

}  // namespace

ReplicateSeeds replicate_seeds(std::uint64_t base_seed, std::size_t replicate) {
  const std::uint64_t r = base_seed + replicate;
  return {r, splitmix64(r ^ 0x67726170ULL), splitmix64(r ^ 0x64617461ULL), splitmix64(r ^ 0x72616E64ULL)};
}

ExperimentConfig merge_config(ExperimentConfig c, const json& doc) {
  if (!doc.is_object()) config_error("configuration must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "nodes") {
      c.nodes = list_of<std::size_t>(value, key);
    } else if (key == "density") {
      c.densities = list_of<double>(value, key);
    } else if (key == "sem") {
      c.sems = list_of<std::string>(value, key);
    } else if (key == "s") {
      c.s = list_of<std::size_t>(value, key);
    } else if (key == "alpha") {
      c.alphas = list_of<double>(value, key);
    } else if (key == "rule") {
      c.rules = list_of<std::string>(value, key);
    } else if (key == "replicates") {
      c.replicates = scalar_of<std::size_t>(value, key);
    } else if (key == "seed") {
      c.seed = scalar_of<std::uint64_t>(value, key);
    } else if (key == "oracle") {
      c.oracle = scalar_of<bool>(value, key);
    } else if (key == "workers") {
      c.workers = scalar_of<std::size_t>(value, key);
    } else if (key == "require_negative_siv") {
      c.require_negative_siv = scalar_of<bool>(value, key);
    } else if (key == "tie_break") {
      c.tie_break = scalar_of<std::string>(value, key);
    } else if (key == "family_mode") {
      c.family_mode = scalar_of<std::string>(value, key);
    } else if (key == "siv_threshold") {
      if (value.is_null()) {
        c.siv_threshold.reset();
      } else {
        c.siv_threshold = scalar_of<double>(value, key);
      }
    } else if (key == "graph") {
      c.graph = scalar_of<std::string>(value, key);
    } else if (key == "bif") {
      c.bif = scalar_of<std::string>(value, key);
    } else if (key == "bif_samples") {
      c.bif_samples = scalar_of<std::size_t>(value, key);
    } else if (key == "graphs_dir") {
      c.graphs_dir = scalar_of<std::string>(value, key);
    } else {
      config_error("unknown configuration key '" + key + "'");
    }
  }
  return c;
}

ExperimentConfig config_from_json(const json& doc) { return merge_config(ExperimentConfig{}, doc); }

json config_to_json(const ExperimentConfig& c) {
  json doc = {{"nodes", c.nodes},
              {"density", c.densities},
              {"sem", c.sems},
              {"s", c.s},
              {"alpha", c.alphas},
              {"rule", c.rules},
              {"replicates", c.replicates},
              {"seed", c.seed},
              {"oracle", c.oracle},
              {"workers", c.workers},
              {"require_negative_siv", c.require_negative_siv},
              {"tie_break", c.tie_break},
              {"family_mode", c.family_mode},
              {"graph", c.graph},
              {"bif", c.bif},
              {"bif_samples", c.bif_samples},
              {"graphs_dir", c.graphs_dir}};
  doc["siv_threshold"] = c.siv_threshold ? json(*c.siv_threshold) : json(nullptr);
  return doc;
}

void validate(const ExperimentConfig& c) {
  if (c.replicates == 0) config_error("replicates must be at least 1");
  if (c.workers == 0) config_error("workers must be at least 1");
  for (double a : c.alphas) {
    if (!(a > 0.0 && a < 1.0)) config_error("alpha must lie in (0, 1)");
  }
  for (const auto& r : c.rules) {
    if (!is_rule_name(r)) config_error("unknown rule '" + r + "'");
  }
  try {
    (void)parse_tie_break(c.tie_break);
    (void)parse_family_mode(c.family_mode);
  } catch (const Error& e) {
    config_error(e.what());
  }
  if (!c.bif.empty() && !c.graph.empty()) config_error("'bif' and 'graph' are mutually exclusive");
  if (!c.bif.empty()) {
    if (c.bif_samples == 0) config_error("bif_samples must be at least 1");
    return;
  }
  for (const auto& sem : c.sems) {
    try {
      (void)parse_sem(sem);
    } catch (const Error& e) {
      config_error(e.what());
    }
  }
  for (std::size_t s : c.s) {
    if (s == 0) config_error("s must be at least 1");
  }
  if (!c.graph.empty()) return;
  for (std::size_t n : c.nodes) {
    if (n < 2) config_error("nodes must be at least 2");
    for (double d : c.densities) {
      const double edges = static_cast<double>(n) * d;
      if (!(d >= 0.0) || std::abs(edges - std::round(edges)) > 1e-9) {
        config_error("nodes * density must be a whole number of edges");
      }
      if (edges > static_cast<double>(n * (n - 1) / 2)) config_error("density too high for a DAG");
    }
  }
}

std::vector<ResultRecord> run_suite(const ExperimentConfig& config) {
  validate(config);
  Shared shared;
  shared.config = &config;
  std::vector<DataCell> data_cells;
  if (!config.bif.empty()) {
    shared.net = load_bif(config.bif);
    const std::size_t n = shared.net->num_variables();
    const double density = n ? static_cast<double>(shared.net->graph().num_edges()) / static_cast<double>(n) : 0.0;
    std::string name = std::filesystem::path(config.bif).stem().string();
    data_cells.push_back({n, density, "bif:" + name, std::nullopt});
  } else {
    std::vector<std::pair<std::size_t, double>> shapes;
    if (!config.graph.empty()) {
      shared.fixed_graph = to_dag(load_graph(config.graph));
      const std::size_t n = shared.fixed_graph->num_nodes();
      shapes.emplace_back(n, n ? static_cast<double>(shared.fixed_graph->num_edges()) / static_cast<double>(n) : 0.0);
    } else {
      for (std::size_t n : config.nodes) {
        for (double d : config.densities) shapes.emplace_back(n, d);
      }
    }
    for (const auto& [n, d] : shapes) {
      for (const auto& sem : config.sems) {
        for (std::size_t s : config.s) data_cells.push_back({n, d, sem, s});
      }
    }
  }

  std::vector<Job> jobs;
  std::size_t next_config = 0;
  for (const DataCell& dc : data_cells) {
    std::vector<Cell> cells;
    for (double a : config.alphas) {
      for (const auto& r : config.rules) cells.push_back({next_config++, a, r});
    }
    for (std::size_t rep = 0; rep < config.replicates; ++rep) jobs.push_back({dc, cells, rep});
  }

  std::vector<std::vector<ResultRecord>> outputs(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) outputs[k] = run_job(jobs[k], shared);
  };
  if (!config.graphs_dir.empty()) std::filesystem::create_directories(config.graphs_dir);
  const std::size_t threads = std::min(config.workers, jobs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<ResultRecord> records;
  for (auto& out : outputs) {
    for (auto& row : out) records.push_back(std::move(row));
  }
  std::stable_sort(records.begin(), records.end(), [](const ResultRecord& a, const ResultRecord& b) {
    return a.config_id != b.config_id ? a.config_id < b.config_id : a.replicate < b.replicate;
  });
  return records;
}

std::vector<ResultRecord> bif_suite(const std::string& bif_path, std::size_t num_samples,
                                    const std::vector<std::string>& rules, std::uint64_t seed,
                                    std::size_t replicates, double alpha) {
  ExperimentConfig config;
  config.bif = bif_path;
  config.bif_samples = num_samples;
  config.rules = rules;
  config.seed = seed;
  config.replicates = replicates;
  config.alphas = {alpha};
  return run_suite(config);
}

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> columns = [] {
    std::vector<std::string> c = {"config_id", "nodes",     "density", "sem",    "s",
                                  "n_samples", "alpha",     "rule",    "oracle", "replicate",
                                  "seed",      "true_edges", "zeta"};
    for (const auto& m : metric_columns()) c.push_back(m);
    c.insert(c.end(), {"num_tests", "elapsed_s", "error"});
    return c;
  }();
  return columns;
}

ResultTable to_table(const std::vector<ResultRecord>& records) {
  ResultTable table;
  table.header = result_columns();
  for (const auto& r : records) {
    std::vector<std::string> row = {std::to_string(r.config_id),
                                    std::to_string(r.nodes),
                                    format_real(r.density),
                                    r.sem,
                                    r.s ? std::to_string(*r.s) : "NA",
                                    std::to_string(r.n_samples),
                                    format_real(r.alpha),
                                    r.rule,
                                    r.oracle ? "true" : "false",
                                    std::to_string(r.replicate),
                                    std::to_string(r.seed),
                                    std::to_string(r.true_edges),
                                    format_real(r.zeta)};
    if (r.ok) {
      for (auto& v : metric_values(r.metrics)) row.push_back(std::move(v));
    } else {
      row.insert(row.end(), metric_columns().size(), "NA");
    }
    row.push_back(std::to_string(r.num_tests));
    row.push_back(format_fixed(r.elapsed_s));
    row.push_back(sanitize(r.error));
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRecord>& records) {
  const ResultTable table = to_table(records);
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
    out << '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) line(row);
}

void write_results_json(std::ostream& out, const std::vector<ResultRecord>& records) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json row;
    row["config_id"] = r.config_id;
    row["nodes"] = r.nodes;
    row["density"] = r.density;
    row["sem"] = r.sem;
    row["s"] = r.s ? nlohmann::ordered_json(*r.s) : nlohmann::ordered_json(nullptr);
    row["n_samples"] = r.n_samples;
    row["alpha"] = r.alpha;
    row["rule"] = r.rule;
    row["oracle"] = r.oracle;
    row["replicate"] = r.replicate;
    row["seed"] = r.seed;
    row["true_edges"] = r.true_edges;
    row["zeta"] = real_or_null(r.zeta);
    if (r.ok) {
      const MetricRow& m = r.metrics;
      const ConfusionCounts& c = m.counts;
      row["metrics"] = {{"shd", m.shd},
                        {"nshd", real_or_null(m.nshd)},
                        {"sid", m.sid},
                        {"nsid", real_or_null(m.nsid)},
                        {"precision", real_or_null(m.rates.precision)},
                        {"recall", real_or_null(m.rates.recall)},
                        {"fdr", real_or_null(m.rates.fdr)},
                        {"tpr", real_or_null(m.rates.tpr)},
                        {"fpr", real_or_null(m.rates.fpr)},
                        {"egs", m.egs},
                        {"tp", c.tp},
                        {"fp", c.fp},
                        {"tn", c.tn},
                        {"fn", c.fn},
                        {"reversed", c.reversed},
                        {"extra", c.extra},
                        {"missing", c.missing}};
    } else {
      row["metrics"] = nullptr;
    }
    row["num_tests"] = r.num_tests;
    row["elapsed_s"] = r.elapsed_s;
    row["error"] = r.error.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.error);
    doc.push_back(std::move(row));
  }
  out << doc.dump(2) << '\n';
}

ResultTable read_results_csv(std::istream& in) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  ResultTable table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw ParseError("expected " + std::to_string(table.header.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       lineno, 1);
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

const std::vector<std::string>& default_group_keys() {
  static const std::vector<std::string> keys = {"zeta", "sem_class", "rule"};
  return keys;
}

void emit_plot_data(const ResultTable& table, const std::vector<std::string>& keys, std::ostream& out) {
  if (table.rows.empty()) throw Error(ErrorCode::kEmptyResults, "no result rows to aggregate");
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - table.header.begin());
  };
  const auto sem_col = column("sem");
  std::vector<std::optional<std::size_t>> key_cols;
  for (const auto& k : keys) {
    auto c = column(k);
    if (!c && !(k == "sem_class" && sem_col)) {
      throw Error(ErrorCode::kInvalidArgument, "unknown group-by key '" + k + "'");
    }
    key_cols.push_back(c);
  }
  static const std::vector<std::string> metric_names = {"shd", "nshd", "sid", "nsid", "precision", "recall", "fdr",
                                                        "tpr", "fpr", "egs", "num_tests", "elapsed_s"};
  std::vector<std::pair<std::string, std::size_t>> metrics;
  for (const auto& m : metric_names) {
    if (auto c = column(m)) metrics.emplace_back(m, *c);
  }
  const auto error_col = column("error");

  auto key_value = [&](const std::vector<std::string>& row, std::size_t k) -> std::string {
    if (keys[k] == "sem_class" && !key_cols[k]) {
      const std::string& sem = row[*sem_col];
      if (sem.rfind("bif:", 0) == 0) return "bif";
      try {
        return std::string(sem_class(parse_sem(sem)));
      } catch (const Error&) {
        return sem;
      }
    }
    const std::string& v = row[*key_cols[k]];
    if (keys[k] == "zeta" && v != "NA") {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.6f", std::strtod(v.c_str(), nullptr));
      return buf;
    }
    return v;
  };

  std::vector<std::vector<std::string>> group_keys;
  std::map<std::vector<std::string>, std::vector<std::vector<double>>> values;
  std::map<std::vector<std::string>, std::size_t> counts;
  for (const auto& row : table.rows) {
    if (error_col && !row[*error_col].empty()) continue;
    std::vector<std::string> key;
    for (std::size_t k = 0; k < keys.size(); ++k) key.push_back(key_value(row, k));
    auto [it, inserted] = values.try_emplace(key, metrics.size());
    if (inserted) group_keys.push_back(key);
    ++counts[key];
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      const std::string& cell = row[metrics[m].second];
      if (cell == "NA" || cell.empty()) continue;
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (*end == '\0' && std::isfinite(v)) it->second[m].push_back(v);
    }
  }
  if (group_keys.empty()) throw Error(ErrorCode::kEmptyResults, "every result row carries an error");

  for (std::size_t k = 0; k < keys.size(); ++k) out << (k ? "," : "") << keys[k];
  out << (keys.empty() ? "" : ",") << "count";
  for (const auto& [name, col] : metrics) out << ',' << name << "_mean," << name << "_sd";
  out << '\n';
  for (const auto& key : group_keys) {
    const auto& groups = values.at(key);
    const std::size_t count = counts.at(key);
    for (std::size_t k = 0; k < key.size(); ++k) out << (k ? "," : "") << key[k];
    out << (keys.empty() ? "" : ",") << count;
    for (const auto& vals : groups) {
      double mean = std::nan("");
      double sd = std::nan("");
      if (!vals.empty()) {
        double sum = 0.0;
        for (double v : vals) sum += v;
        mean = sum / static_cast<double>(vals.size());
      }
      if (vals.size() >= 2) {
        double ss = 0.0;
        for (double v : vals) ss += (v - mean) * (v - mean);
        sd = std::sqrt(ss / static_cast<double>(vals.size() - 1));
      }
      out << ',' << format_real(mean) << ',' << format_real(sd);
    }
    out << '\n';
  }
}

}  // namespace spc
