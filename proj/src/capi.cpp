#include "shapleypc/shapleypc.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "bench.hpp"
#include "bif.hpp"
#include "ci_test.hpp"
#include "dataset.hpp"
#include "dgp.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "metrics.hpp"
#include "pc.hpp"

struct spc_graph {
  spc::MixedGraph g;
};

struct spc_dataset {
  spc::Dataset ds;
};

struct spc_network {
  spc::DiscreteBayesNet net;
};

struct spc_result {
  spc::PcRunResult run;
};

namespace {

thread_local std::string last_error;

template <typename F>
spc_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return SPC_OK;
  } catch (const spc::Error& e) {
    last_error = e.what();
    return static_cast<spc_status>(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return SPC_ERR_INTERNAL;
  } catch (const nlohmann::json::exception& e) {
    last_error = e.what();
    return SPC_ERR_CONFIG;
  } catch (const std::exception& e) {
    last_error = e.what();
    return SPC_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw spc::Error(spc::ErrorCode::kInvalidArgument, what);
}

// The add_* calls insert only; set_* on MixedGraph would overwrite a mark.
void reject_existing(const spc::MixedGraph& g, std::size_t a, std::size_t b) {
  if (a < g.num_nodes() && b < g.num_nodes() && a != b && g.adjacent(a, b)) {
    throw spc::Error(spc::ErrorCode::kDuplicateEdge,
                     "nodes " + std::to_string(a) + " and " + std::to_string(b) + " are already adjacent");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

spc::PcOptions parse_options(const char* options_json) {
  spc::PcOptions opts;
  if (options_json == nullptr || *options_json == '\0') return opts;
  const auto doc = nlohmann::json::parse(options_json);
  if (!doc.is_object()) throw spc::Error(spc::ErrorCode::kConfig, "options must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "alpha") {
      opts.alpha = value.get<double>();
    } else if (key == "rule") {
      opts.rule = spc::parse_rule(value.get<std::string>());
    } else if (key == "workers") {
      opts.workers = value.get<std::size_t>();
    } else if (key == "require_negative_siv") {
      opts.rule_options.require_negative_siv = value.get<bool>();
    } else if (key == "tie_break") {
      opts.rule_options.tie_break = spc::parse_tie_break(value.get<std::string>());
    } else if (key == "family_mode") {
      opts.rule_options.family_mode = spc::parse_family_mode(value.get<std::string>());
    } else if (key == "siv_threshold") {
      if (value.is_null()) {
        opts.rule_options.siv_threshold.reset();
      } else {
        opts.rule_options.siv_threshold = value.get<double>();
      }
    } else {
      throw spc::Error(spc::ErrorCode::kConfig, "unknown option '" + key + "'");
    }
  }
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) {
    throw spc::Error(spc::ErrorCode::kInvalidArgument, "alpha must lie in (0, 1)");
  }
  if (opts.workers == 0) throw spc::Error(spc::ErrorCode::kInvalidArgument, "workers must be at least 1");
  return opts;
}

nlohmann::json metrics_to_json(const spc::MetricRow& m) {
  auto real = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  const auto& c = m.counts;
  return {{"shd", m.shd},          {"nshd", real(m.nshd)},
          {"sid", m.sid},          {"nsid", real(m.nsid)},
          {"precision", real(m.rates.precision)}, {"recall", real(m.rates.recall)},
          {"fdr", real(m.rates.fdr)},             {"tpr", real(m.rates.tpr)},
          {"fpr", real(m.rates.fpr)},             {"egs", m.egs},
          {"tp", c.tp},            {"fp", c.fp},
          {"tn", c.tn},            {"fn", c.fn},
          {"reversed", c.reversed}, {"extra", c.extra},
          {"missing", c.missing},  {"true_edges", c.true_edges}};
}

}  // namespace

extern "C" {

const char* spc_version(void) { return "0.1.0"; }

const char* spc_last_error(void) { return last_error.c_str(); }

void spc_string_free(char* str) { std::free(str); }

spc_status spc_graph_create(size_t num_nodes, spc_graph** out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    *out = new spc_graph{spc::MixedGraph(num_nodes)};
  });
}

spc_status spc_graph_load(const char* path, spc_graph** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new spc_graph{spc::load_graph(path)};
  });
}

spc_status spc_graph_save(const spc_graph* g, const char* path) {
  return guarded([&] {
    require(g != nullptr && path != nullptr, "null argument");
    spc::save_graph(path, g->g);
  });
}

spc_status spc_graph_from_string(const char* text, spc_graph** out) {
  return guarded([&] {
    require(text != nullptr && out != nullptr, "null argument");
    std::istringstream in(text);
    *out = new spc_graph{spc::read_edge_list(in)};
  });
}

spc_status spc_graph_to_string(const spc_graph* g, char** out) {
  return guarded([&] {
    require(g != nullptr && out != nullptr, "null argument");
    std::ostringstream buf;
    spc::write_edge_list(buf, g->g);
    *out = copy_string(buf.str());
  });
}

spc_status spc_graph_add_directed(spc_graph* g, size_t from, size_t to) {
  return guarded([&] {
    require(g != nullptr, "null graph");
    reject_existing(g->g, from, to);
    g->g.set_directed(from, to);
  });
}

spc_status spc_graph_add_undirected(spc_graph* g, size_t a, size_t b) {
  return guarded([&] {
    require(g != nullptr, "null graph");
    reject_existing(g->g, a, b);
    g->g.set_undirected(a, b);
  });
}

size_t spc_graph_num_nodes(const spc_graph* g) { return g ? g->g.num_nodes() : 0; }

size_t spc_graph_num_edges(const spc_graph* g) { return g ? g->g.num_edges() : 0; }

spc_status spc_graph_equal(const spc_graph* a, const spc_graph* b, int* out) {
  return guarded([&] {
    require(a != nullptr && b != nullptr && out != nullptr, "null argument");
    *out = a->g == b->g ? 1 : 0;
  });
}

spc_status spc_graph_cpdag(const spc_graph* dag, spc_graph** out) {
  return guarded([&] {
    require(dag != nullptr && out != nullptr, "null argument");
    *out = new spc_graph{spc::dag_to_cpdag(spc::to_dag(dag->g))};
  });
}

spc_status spc_graph_d_separated(const spc_graph* dag, size_t i, size_t j, const size_t* conditioning,
                                 size_t conditioning_size, int* out) {
  return guarded([&] {
    require(dag != nullptr && out != nullptr, "null argument");
    require(conditioning != nullptr || conditioning_size == 0, "null conditioning set");
    std::vector<spc::Node> z(conditioning, conditioning + conditioning_size);
    *out = spc::d_separated(spc::to_dag(dag->g), i, j, spc::make_node_set(std::move(z))) ? 1 : 0;
  });
}

void spc_graph_free(spc_graph* g) { delete g; }

spc_status spc_er_dag(size_t num_nodes, double density, uint64_t seed, spc_graph** out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    *out = new spc_graph{spc::er_dag(num_nodes, density, seed).to_mixed()};
  });
}

spc_status spc_simulate(const spc_graph* dag, const char* sem, size_t num_samples, uint64_t seed, int standardize,
                        spc_dataset** out) {
  return guarded([&] {
    require(dag != nullptr && sem != nullptr && out != nullptr, "null argument");
    spc::Dataset ds = spc::simulate(spc::to_dag(dag->g), spc::parse_sem(sem), num_samples, seed);
    if (standardize) ds = spc::standardize(ds);
    *out = new spc_dataset{std::move(ds)};
  });
}

spc_status spc_dataset_from_matrix(const double* row_major, size_t rows, size_t cols, spc_dataset** out) {
  return guarded([&] {
    require(out != nullptr && (row_major != nullptr || rows * cols == 0), "null argument");
    spc::Dataset ds;
    ds.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t r = 0; r < rows; ++r) {
      for (size_t c = 0; c < cols; ++c) {
        ds.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row_major[r * cols + c];
      }
    }
    for (size_t c = 0; c < cols; ++c) ds.names.push_back("X" + std::to_string(c));
    *out = new spc_dataset{std::move(ds)};
  });
}

spc_status spc_dataset_load_csv(const char* path, spc_dataset** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new spc_dataset{spc::load_dataset_csv(path)};
  });
}

spc_status spc_dataset_save_csv(const spc_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds != nullptr && path != nullptr, "null argument");
    spc::save_dataset_csv(path, ds->ds);
  });
}

size_t spc_dataset_rows(const spc_dataset* ds) { return ds ? ds->ds.num_samples() : 0; }

size_t spc_dataset_cols(const spc_dataset* ds) { return ds ? ds->ds.num_variables() : 0; }

spc_status spc_dataset_get(const spc_dataset* ds, size_t row, size_t col, double* out) {
  return guarded([&] {
    require(ds != nullptr && out != nullptr, "null argument");
    if (row >= ds->ds.num_samples() || col >= ds->ds.num_variables()) {
      throw spc::Error(spc::ErrorCode::kIndex, "cell out of range");
    }
    *out = ds->ds.values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  });
}

spc_status spc_dataset_standardize(spc_dataset* ds) {
  return guarded([&] {
    require(ds != nullptr, "null dataset");
    ds->ds = spc::standardize(ds->ds);
  });
}

void spc_dataset_free(spc_dataset* ds) { delete ds; }

spc_status spc_discover(const spc_dataset* ds, const char* options_json, spc_result** out) {
  return guarded([&] {
    require(ds != nullptr && out != nullptr, "null argument");
    const spc::PcOptions opts = parse_options(options_json);
    const spc::FisherZTest cit(ds->ds);
    *out = new spc_result{spc::run_pc(cit, opts)};
  });
}

spc_status spc_discover_oracle(const spc_graph* truth_dag, const char* options_json, spc_result** out) {
  return guarded([&] {
    require(truth_dag != nullptr && out != nullptr, "null argument");
    const spc::PcOptions opts = parse_options(options_json);
    const spc::OracleTest cit(spc::to_dag(truth_dag->g));
    *out = new spc_result{spc::run_pc(cit, opts)};
  });
}

spc_status spc_result_graph(const spc_result* r, spc_graph** out) {
  return guarded([&] {
    require(r != nullptr && out != nullptr, "null argument");
    *out = new spc_graph{r->run.cpdag};
  });
}

size_t spc_result_num_tests(const spc_result* r) { return r ? r->run.num_tests : 0; }

double spc_result_elapsed_seconds(const spc_result* r) { return r ? r->run.elapsed.count() : 0.0; }

spc_status spc_result_siv_jsonl(const spc_result* r, char** out) {
  return guarded([&] {
    require(r != nullptr && out != nullptr, "null argument");
    std::string text;
    for (const auto& report : r->run.siv_reports) text += spc::to_json_line(report) + "\n";
    *out = copy_string(text);
  });
}

void spc_result_free(spc_result* r) { delete r; }

spc_status spc_metrics_json(const spc_graph* est, const spc_graph* truth_dag, int cpdag_target, char** out) {
  return guarded([&] {
    require(est != nullptr && truth_dag != nullptr && out != nullptr, "null argument");
    const spc::Dag truth = spc::to_dag(truth_dag->g);
    const spc::MetricRow row =
        cpdag_target ? spc::evaluate_against_cpdag(est->g, truth) : spc::evaluate(est->g, truth);
    *out = copy_string(metrics_to_json(row).dump());
  });
}

spc_status spc_saturation(size_t num_nodes, double density, double* out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    *out = spc::saturation(num_nodes, density);
  });
}

spc_status spc_bif_load(const char* path, spc_network** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new spc_network{spc::load_bif(path)};
  });
}

spc_status spc_bif_parse(const char* text, spc_network** out) {
  return guarded([&] {
    require(text != nullptr && out != nullptr, "null argument");
    *out = new spc_network{spc::parse_bif(text)};
  });
}

spc_status spc_bif_to_string(const spc_network* net, char** out) {
  return guarded([&] {
    require(net != nullptr && out != nullptr, "null argument");
    *out = copy_string(spc::to_bif(net->net));
  });
}

size_t spc_network_num_variables(const spc_network* net) { return net ? net->net.num_variables() : 0; }

spc_status spc_network_graph(const spc_network* net, spc_graph** out) {
  return guarded([&] {
    require(net != nullptr && out != nullptr, "null argument");
    *out = new spc_graph{net->net.graph().to_mixed()};
  });
}

spc_status spc_bif_sample(const spc_network* net, size_t num_samples, uint64_t seed, const char* codes_csv_path,
                          spc_dataset** encoded) {
  return guarded([&] {
    require(net != nullptr, "null network");
    const spc::DiscreteDataset dd = spc::sample_bn(net->net, num_samples, seed);
    if (codes_csv_path != nullptr) spc::save_discrete_csv(codes_csv_path, dd);
    if (encoded != nullptr) *encoded = new spc_dataset{spc::encode_standardize(dd)};
  });
}

void spc_network_free(spc_network* net) { delete net; }

spc_status spc_bench_run(const char* config_json, const char* csv_path, const char* json_path) {
  return guarded([&] {
    require(config_json != nullptr, "null configuration");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::parse_error& e) {
      throw spc::Error(spc::ErrorCode::kConfig, e.what());
    }
    const spc::ExperimentConfig config = spc::config_from_json(doc);
    const auto records = spc::run_suite(config);
    // Results are complete before any file is touched.
    if (csv_path != nullptr) {
      std::ofstream out(csv_path, std::ios::binary);
      if (!out) throw spc::Error(spc::ErrorCode::kIo, std::string("cannot write ") + csv_path);
      spc::write_results_csv(out, records);
    }
    if (json_path != nullptr) {
      std::ofstream out(json_path, std::ios::binary);
      if (!out) throw spc::Error(spc::ErrorCode::kIo, std::string("cannot write ") + json_path);
      spc::write_results_json(out, records);
    }
  });
}

spc_status spc_result_columns(char** out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    std::string header;
    for (const auto& c : spc::result_columns()) header += (header.empty() ? "" : ",") + c;
    *out = copy_string(header);
  });
}

spc_status spc_plotdata(const char* results_csv_path, const char* group_keys, const char* out_path) {
  return guarded([&] {
    require(results_csv_path != nullptr && out_path != nullptr, "null argument");
    std::ifstream in(results_csv_path, std::ios::binary);
    if (!in) throw spc::Error(spc::ErrorCode::kIo, std::string("cannot open ") + results_csv_path);
    const spc::ResultTable table = spc::read_results_csv(in);
    std::vector<std::string> keys = spc::default_group_keys();
    if (group_keys != nullptr) {
      keys.clear();
      std::istringstream ss(group_keys);
      std::string key;
      while (std::getline(ss, key, ',')) {
        if (!key.empty()) keys.push_back(key);
      }
    }
    std::ostringstream buf;
    spc::emit_plot_data(table, keys, buf);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw spc::Error(spc::ErrorCode::kIo, std::string("cannot write ") + out_path);
    out << buf.str();
  });
}

}  // extern "C"
