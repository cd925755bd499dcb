// spc: command-line front end over libshapleypc.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "shapleypc/shapleypc.h"

namespace {

using json = nlohmann::json;

struct Failure {
  spc_status status;
};

void check(spc_status status) {
  if (status != SPC_OK) throw Failure{status};
}

struct GraphDeleter {
  void operator()(spc_graph* g) const { spc_graph_free(g); }
};
struct DatasetDeleter {
  void operator()(spc_dataset* d) const { spc_dataset_free(d); }
};
struct ResultDeleter {
  void operator()(spc_result* r) const { spc_result_free(r); }
};
struct NetworkDeleter {
  void operator()(spc_network* n) const { spc_network_free(n); }
};
using GraphPtr = std::unique_ptr<spc_graph, GraphDeleter>;
using DatasetPtr = std::unique_ptr<spc_dataset, DatasetDeleter>;
using ResultPtr = std::unique_ptr<spc_result, ResultDeleter>;
using NetworkPtr = std::unique_ptr<spc_network, NetworkDeleter>;

std::string take(char* s) {
  std::string out = s ? s : "";
  spc_string_free(s);
  return out;
}

GraphPtr load_graph(const std::string& path) {
  spc_graph* g = nullptr;
  check(spc_graph_load(path.c_str(), &g));
  return GraphPtr(g);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "spc: cannot write " << path << "\n";
    throw Failure{SPC_ERR_IO};
  }
  out << text;
}

std::string results_help() {
  return "Results CSV columns, in order:\n  " + take([] {
           char* s = nullptr;
           spc_result_columns(&s);
           return s;
         }()) +
         "\nUndefined rates and rows that failed are written as NA; the error column holds the\n"
         "failure message. elapsed_s is the only column that varies between identical runs.";
}

struct DiscoverArgs {
  std::string data;
  std::string oracle;
  double alpha = 0.01;
  std::string rule = "SPC";
  std::size_t workers = 1;
  std::string tie_break = "all-minimizers";
  std::string family_mode = "deduplicated";
  bool allow_nonnegative = false;
  std::string out;
  std::string siv_log;
};

int run_discover(const DiscoverArgs& a) {
  json opts = {{"alpha", a.alpha},
               {"rule", a.rule},
               {"workers", a.workers},
               {"tie_break", a.tie_break},
               {"family_mode", a.family_mode},
               {"require_negative_siv", !a.allow_nonnegative}};
  const std::string text = opts.dump();
  spc_result* raw = nullptr;
  if (!a.oracle.empty()) {
    GraphPtr truth = load_graph(a.oracle);
    check(spc_discover_oracle(truth.get(), text.c_str(), &raw));
  } else {
    spc_dataset* ds = nullptr;
    check(spc_dataset_load_csv(a.data.c_str(), &ds));
    DatasetPtr data(ds);
    check(spc_dataset_standardize(data.get()));
    check(spc_discover(data.get(), text.c_str(), &raw));
  }
  ResultPtr result(raw);
  spc_graph* g = nullptr;
  check(spc_result_graph(result.get(), &g));
  GraphPtr est(g);
  char* s = nullptr;
  check(spc_graph_to_string(est.get(), &s));
  write_text(a.out, take(s));
  if (!a.siv_log.empty()) {
    char* log = nullptr;
    check(spc_result_siv_jsonl(result.get(), &log));
    write_text(a.siv_log, take(log));
  }
  std::fprintf(stderr, "tests: %zu, elapsed: %.6f s\n", spc_result_num_tests(result.get()),
               spc_result_elapsed_seconds(result.get()));
  return 0;
}

std::string json_path_for(const std::string& csv) {
  if (csv.size() > 4 && csv.compare(csv.size() - 4, 4, ".csv") == 0) return csv.substr(0, csv.size() - 4) + ".json";
  return csv + ".json";
}

int run_bench(const json& config, const std::string& out, std::string json_out) {
  if (json_out.empty()) json_out = json_path_for(out);
  const std::string text = config.dump();
  check(spc_bench_run(text.c_str(), out.c_str(), json_out.c_str()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constraint-based causal discovery with Shapley-value v-structure decisions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(spc_version()));

  // simulate
  auto* sim = app.add_subcommand("simulate", "Draw an ER DAG and a dataset from a structural equation model");
  std::size_t sim_nodes = 10;
  double sim_density = 1.0;
  std::string sim_sem = "linear-gauss";
  std::size_t sim_samples = 500;
  std::uint64_t sim_seed = 0;
  std::string sim_graph_in, sim_data_out = "data.csv", sim_graph_out = "graph.txt";
  bool sim_raw = false;
  sim->add_option("--nodes", sim_nodes, "Number of variables")->capture_default_str();
  sim->add_option("--density", sim_density, "Edges per node")->capture_default_str();
  sim->add_option("--sem", sim_sem,
                  "linear-gauss, linear-exp, linear-gumbel, linear-uniform, mlp, mim, gp or gp-add")
      ->capture_default_str();
  sim->add_option("--samples", sim_samples, "Number of rows")->capture_default_str();
  sim->add_option("--seed", sim_seed, "Random seed")->capture_default_str();
  sim->add_option("--graph", sim_graph_in, "Use this DAG instead of drawing one");
  sim->add_option("--out", sim_data_out, "Dataset CSV (headerless)")->capture_default_str();
  sim->add_option("--graph-out", sim_graph_out, "Edge-list file for the true DAG")->capture_default_str();
  sim->add_flag("--raw", sim_raw, "Skip standardization");

  // discover
  auto* disc = app.add_subcommand("discover", "Estimate a CPDAG from data or from a d-separation oracle");
  DiscoverArgs da;
  auto* data_opt = disc->add_option("--data", da.data, "Headerless numeric CSV");
  auto* oracle_opt = disc->add_option("--oracle", da.oracle, "True DAG; answers tests by d-separation");
  data_opt->excludes(oracle_opt);
  disc->add_option("--alpha", da.alpha, "Significance level")->capture_default_str();
  disc->add_option("--rule", da.rule, "SPC, MaxPC, CPC, MPC or Vanilla")->capture_default_str();
  disc->add_option("--workers", da.workers, "Threads for the adjacency search")->capture_default_str();
  disc->add_option("--tie-break", da.tie_break, "all-minimizers or lowest-index")->capture_default_str();
  disc->add_option("--family", da.family_mode, "deduplicated or multiset")->capture_default_str();
  disc->add_flag("--allow-nonnegative-siv", da.allow_nonnegative, "Let SPC fire on a non-negative minimum");
  disc->add_option("--out", da.out, "Output edge list (default stdout)");
  disc->add_option("--siv-log", da.siv_log, "JSON lines with every SIV computed");

  // bench
  auto* bench = app.add_subcommand("bench", "Run a seeded experiment sweep");
  bench->footer(results_help());
  std::string config_path, bench_out = "results.csv", bench_json;
  std::vector<std::size_t> b_nodes, b_s;
  std::vector<double> b_density, b_alpha;
  std::vector<std::string> b_sem, b_rule;
  std::uint64_t b_seed = 0;
  std::size_t b_reps = 0, b_workers = 0;
  bool b_oracle = false;
  std::string b_tie_break, b_bif, b_graphs_dir;
  bench->add_option("--config", config_path, "JSON configuration file");
  auto* o_nodes = bench->add_option("--nodes", b_nodes, "Node counts");
  auto* o_density = bench->add_option("--density", b_density, "Densities");
  auto* o_sem = bench->add_option("--sem", b_sem, "SEM families");
  auto* o_s = bench->add_option("--s", b_s, "Samples per node");
  auto* o_alpha = bench->add_option("--alpha", b_alpha, "Significance levels");
  auto* o_rule = bench->add_option("--rule", b_rule, "Rules (SPC MaxPC CPC MPC Vanilla Random)");
  auto* o_seed = bench->add_option("--seed", b_seed, "Base seed; replicate r uses seed + r");
  auto* o_reps = bench->add_option("--reps", b_reps, "Replicates per configuration");
  auto* o_workers = bench->add_option("--workers", b_workers, "Concurrent replicates");
  auto* o_oracle = bench->add_flag("--oracle", b_oracle, "Use the d-separation oracle instead of data");
  auto* o_tie = bench->add_option("--tie-break", b_tie_break, "all-minimizers or lowest-index");
  auto* o_bif = bench->add_option("--bif", b_bif, "BIF network instead of random graphs");
  auto* o_gdir = bench->add_option("--graphs-dir", b_graphs_dir, "Directory for truth/estimate edge lists");
  bench->add_option("--out", bench_out, "Results CSV")->capture_default_str();
  bench->add_option("--json", bench_json, "Results JSON (default: --out with .json)");

  // bif
  auto* bif = app.add_subcommand("bif", "Parse a BIF network, sample it and run the discovery rules");
  bif->footer(results_help());
  std::string bif_file, bif_out = "bif_results.csv", bif_json, bif_codes, bif_truth, bif_print;
  std::size_t bif_samples = 2000, bif_reps = 1;
  std::uint64_t bif_seed = 0;
  std::vector<std::string> bif_rules{"SPC"};
  double bif_alpha = 0.01;
  bool bif_oracle = false;
  bif->add_option("--file", bif_file, "BIF file")->required();
  bif->add_option("--samples", bif_samples, "Rows to sample")->capture_default_str();
  bif->add_option("--seed", bif_seed, "Base seed")->capture_default_str();
  bif->add_option("--reps", bif_reps, "Replicates")->capture_default_str();
  bif->add_option("--rule", bif_rules, "Rules to run")->capture_default_str();
  bif->add_option("--alpha", bif_alpha, "Significance level")->capture_default_str();
  bif->add_flag("--oracle", bif_oracle, "Use the d-separation oracle instead of data");
  bif->add_option("--out", bif_out, "Results CSV")->capture_default_str();
  bif->add_option("--json", bif_json, "Results JSON (default: --out with .json)");
  bif->add_option("--codes", bif_codes, "Also write one sample of state codes to this CSV");
  bif->add_option("--truth", bif_truth, "Also write the network's DAG as an edge list");
  bif->add_option("--print", bif_print, "Also write the parsed network back as BIF");

  // metrics
  auto* met = app.add_subcommand("metrics", "Compare an estimated graph with the true DAG");
  std::string met_est, met_truth;
  bool met_cpdag = false;
  met->add_option("--est", met_est, "Estimated graph")->required();
  met->add_option("--truth", met_truth, "True DAG")->required();
  met->add_flag("--cpdag-target", met_cpdag, "Compare marks with the true CPDAG instead of penalizing undirected edges");

  // plotdata
  auto* plot = app.add_subcommand("plotdata", "Aggregate results into mean/sd per group");
  std::string plot_in, plot_out = "-", plot_keys;
  plot->add_option("--results", plot_in, "Results CSV from bench or bif")->required();
  plot->add_option("--group-by", plot_keys, "Comma-separated keys (default zeta,sem_class,rule)");
  plot->add_option("--out", plot_out, "Output CSV (default stdout)")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      GraphPtr g;
      if (!sim_graph_in.empty()) {
        g = load_graph(sim_graph_in);
      } else {
        spc_graph* raw = nullptr;
        check(spc_er_dag(sim_nodes, sim_density, sim_seed, &raw));
        g.reset(raw);
      }
      spc_dataset* raw = nullptr;
      check(spc_simulate(g.get(), sim_sem.c_str(), sim_samples, sim_seed, sim_raw ? 0 : 1, &raw));
      DatasetPtr ds(raw);
      check(spc_dataset_save_csv(ds.get(), sim_data_out.c_str()));
      check(spc_graph_save(g.get(), sim_graph_out.c_str()));
      const json sidecar = {{"seed", sim_seed},
                            {"kind", sim_sem},
                            {"samples", sim_samples},
                            {"standardized", !sim_raw},
                            {"graph", sim_graph_out}};
      write_text(json_path_for(sim_data_out), sidecar.dump(2) + "\n");
      return 0;
    }
    if (*disc) {
      if (da.data.empty() && da.oracle.empty()) {
        std::cerr << "spc discover: one of --data or --oracle is required\n";
        return 2;
      }
      return run_discover(da);
    }
    if (*bench) {
      json config = json::object();
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
          std::cerr << "spc bench: cannot open " << config_path << "\n";
          return 1;
        }
        try {
          config = json::parse(in);
        } catch (const json::parse_error& e) {
          std::cerr << "spc bench: " << config_path << ": " << e.what() << "\n";
          return static_cast<int>(SPC_ERR_CONFIG);
        }
      }
      if (*o_nodes) config["nodes"] = b_nodes;
      if (*o_density) config["density"] = b_density;
      if (*o_sem) config["sem"] = b_sem;
      if (*o_s) config["s"] = b_s;
      if (*o_alpha) config["alpha"] = b_alpha;
      if (*o_rule) config["rule"] = b_rule;
      if (*o_seed) config["seed"] = b_seed;
      if (*o_reps) config["replicates"] = b_reps;
      if (*o_workers) config["workers"] = b_workers;
      if (*o_oracle) config["oracle"] = b_oracle;
      if (*o_tie) config["tie_break"] = b_tie_break;
      if (*o_bif) config["bif"] = b_bif;
      if (*o_gdir) config["graphs_dir"] = b_graphs_dir;
      return run_bench(config, bench_out, bench_json);
    }
    if (*bif) {
      spc_network* raw = nullptr;
      check(spc_bif_load(bif_file.c_str(), &raw));
      NetworkPtr net(raw);
      if (!bif_truth.empty()) {
        spc_graph* g = nullptr;
        check(spc_network_graph(net.get(), &g));
        GraphPtr truth(g);
        check(spc_graph_save(truth.get(), bif_truth.c_str()));
      }
      if (!bif_codes.empty()) check(spc_bif_sample(net.get(), bif_samples, bif_seed, bif_codes.c_str(), nullptr));
      if (!bif_print.empty()) {
        char* s = nullptr;
        check(spc_bif_to_string(net.get(), &s));
        write_text(bif_print, take(s));
      }
      json config = {{"bif", bif_file},   {"bif_samples", bif_samples}, {"seed", bif_seed},
                     {"replicates", bif_reps}, {"rule", bif_rules},     {"alpha", bif_alpha},
                     {"oracle", bif_oracle}};
      return run_bench(config, bif_out, bif_json);
    }
    if (*met) {
      GraphPtr est = load_graph(met_est);
      GraphPtr truth = load_graph(met_truth);
      char* s = nullptr;
      check(spc_metrics_json(est.get(), truth.get(), met_cpdag ? 1 : 0, &s));
      std::cout << json::parse(take(s)).dump(2) << "\n";
      return 0;
    }
    if (*plot) {
      check(spc_plotdata(plot_in.c_str(), plot_keys.empty() ? nullptr : plot_keys.c_str(),
                         plot_out == "-" ? "/dev/stdout" : plot_out.c_str()));
      return 0;
    }
  } catch (const Failure& f) {
    std::cerr << "spc: " << spc_last_error() << "\n";
    return static_cast<int>(f.status);
  }
  return 0;
}
