#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <shapleypc/shapleypc.h>

namespace {

const std::string kData = SPC_DATA_DIR;

std::string take(char* s) {
  std::string out = s ? s : "";
  spc_string_free(s);
  return out;
}

spc_graph* collider() {
  spc_graph* g = nullptr;
  EXPECT_EQ(spc_graph_create(3, &g), SPC_OK);
  EXPECT_EQ(spc_graph_add_directed(g, 0, 2), SPC_OK);
  EXPECT_EQ(spc_graph_add_directed(g, 1, 2), SPC_OK);
  return g;
}

}  // namespace

TEST(CApi, Version) { EXPECT_GT(std::strlen(spc_version()), 0u); }

TEST(CApi, GraphBasicsAndErrors) {
  spc_graph* g = collider();
  EXPECT_EQ(spc_graph_num_nodes(g), 3u);
  EXPECT_EQ(spc_graph_num_edges(g), 2u);
  EXPECT_EQ(spc_graph_add_directed(g, 0, 0), SPC_ERR_SELF_LOOP);
  EXPECT_GT(std::strlen(spc_last_error()), 0u);
  EXPECT_EQ(spc_graph_add_directed(g, 0, 7), SPC_ERR_INDEX);
  EXPECT_EQ(spc_graph_add_directed(g, 0, 2), SPC_ERR_DUPLICATE_EDGE);
  EXPECT_EQ(spc_graph_create(3, nullptr), SPC_ERR_INVALID_ARGUMENT);

  char* text = nullptr;
  ASSERT_EQ(spc_graph_to_string(g, &text), SPC_OK);
  spc_graph* back = nullptr;
  ASSERT_EQ(spc_graph_from_string(text, &back), SPC_OK);
  spc_string_free(text);
  int same = 0;
  ASSERT_EQ(spc_graph_equal(g, back, &same), SPC_OK);
  EXPECT_EQ(same, 1);

  int sep = -1;
  ASSERT_EQ(spc_graph_d_separated(g, 0, 1, nullptr, 0, &sep), SPC_OK);
  EXPECT_EQ(sep, 1);
  const size_t z[] = {2};
  ASSERT_EQ(spc_graph_d_separated(g, 0, 1, z, 1, &sep), SPC_OK);
  EXPECT_EQ(sep, 0);

  spc_graph* cp = nullptr;
  ASSERT_EQ(spc_graph_cpdag(g, &cp), SPC_OK);
  ASSERT_EQ(spc_graph_equal(cp, g, &same), SPC_OK);
  EXPECT_EQ(same, 1);

  spc_graph_free(cp);
  spc_graph_free(back);
  spc_graph_free(g);
  spc_graph_free(nullptr);
}

TEST(CApi, GraphFileRoundTrip) {
  spc_graph* g = nullptr;
  ASSERT_EQ(spc_er_dag(12, 2.0, 4, &g), SPC_OK);
  EXPECT_EQ(spc_graph_num_edges(g), 24u);
  const auto path = (std::filesystem::temp_directory_path() / "spc_capi_graph.txt").string();
  ASSERT_EQ(spc_graph_save(g, path.c_str()), SPC_OK);
  spc_graph* back = nullptr;
  ASSERT_EQ(spc_graph_load(path.c_str(), &back), SPC_OK);
  int same = 0;
  spc_graph_equal(g, back, &same);
  EXPECT_EQ(same, 1);
  EXPECT_EQ(spc_graph_load("/nonexistent/g.txt", &back), SPC_ERR_IO);
  EXPECT_EQ(spc_er_dag(5, 3.0, 1, &back), SPC_ERR_TOO_DENSE);
  spc_graph_free(back);
  spc_graph_free(g);
  std::filesystem::remove(path);
}

TEST(CApi, SimulateDiscoverEvaluate) {
  spc_graph* truth = collider();
  spc_dataset* ds = nullptr;
  ASSERT_EQ(spc_simulate(truth, "linear-gauss", 2000, 3, 1, &ds), SPC_OK);
  EXPECT_EQ(spc_dataset_rows(ds), 2000u);
  EXPECT_EQ(spc_dataset_cols(ds), 3u);
  double v = 0.0;
  EXPECT_EQ(spc_dataset_get(ds, 0, 0, &v), SPC_OK);
  EXPECT_EQ(spc_dataset_get(ds, 2000, 0, &v), SPC_ERR_INDEX);
  EXPECT_EQ(spc_simulate(truth, "cubic", 10, 3, 1, &ds), SPC_ERR_INVALID_ARGUMENT);

  spc_result* r = nullptr;
  ASSERT_EQ(spc_discover(ds, R"({"alpha": 0.01, "rule": "SPC"})", &r), SPC_OK);
  EXPECT_GT(spc_result_num_tests(r), 0u);
  EXPECT_GE(spc_result_elapsed_seconds(r), 0.0);
  spc_graph* est = nullptr;
  ASSERT_EQ(spc_result_graph(r, &est), SPC_OK);
  int same = 0;
  spc_graph_equal(est, truth, &same);
  EXPECT_EQ(same, 1);
  char* siv = nullptr;
  ASSERT_EQ(spc_result_siv_jsonl(r, &siv), SPC_OK);
  EXPECT_NE(take(siv).find("\"phi\""), std::string::npos);

  char* metrics = nullptr;
  ASSERT_EQ(spc_metrics_json(est, truth, 0, &metrics), SPC_OK);
  EXPECT_NE(take(metrics).find("\"shd\":0"), std::string::npos);

  EXPECT_EQ(spc_discover(ds, R"({"rule": "FCI"})", &r), SPC_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(spc_discover(ds, R"({"colour": 1})", &r), SPC_ERR_CONFIG);
  EXPECT_EQ(spc_discover(ds, "{not json", &r), SPC_ERR_CONFIG);

  spc_graph_free(est);
  spc_result_free(r);
  spc_dataset_free(ds);
  spc_graph_free(truth);
}

TEST(CApi, OracleDiscovery) {
  spc_graph* truth = nullptr;
  ASSERT_EQ(spc_er_dag(10, 1.0, 9, &truth), SPC_OK);
  spc_result* r = nullptr;
  ASSERT_EQ(spc_discover_oracle(truth, nullptr, &r), SPC_OK);
  spc_graph* est = nullptr;
  spc_result_graph(r, &est);
  spc_graph* cp = nullptr;
  spc_graph_cpdag(truth, &cp);
  int same = 0;
  spc_graph_equal(est, cp, &same);
  EXPECT_EQ(same, 1);
  spc_graph_free(cp);
  spc_graph_free(est);
  spc_result_free(r);
  spc_graph_free(truth);
}

TEST(CApi, DatasetFromMatrixAndCsv) {
  const double values[] = {1, 2, 2, 4, 3, 7, 4, 8};
  spc_dataset* ds = nullptr;
  ASSERT_EQ(spc_dataset_from_matrix(values, 4, 2, &ds), SPC_OK);
  double v = 0.0;
  spc_dataset_get(ds, 2, 1, &v);
  EXPECT_EQ(v, 7.0);
  ASSERT_EQ(spc_dataset_standardize(ds), SPC_OK);
  spc_dataset_get(ds, 0, 0, &v);
  EXPECT_NEAR(v, -1.5 / std::sqrt(1.25), 1e-12);
  const auto path = (std::filesystem::temp_directory_path() / "spc_capi_data.csv").string();
  ASSERT_EQ(spc_dataset_save_csv(ds, path.c_str()), SPC_OK);
  spc_dataset* back = nullptr;
  ASSERT_EQ(spc_dataset_load_csv(path.c_str(), &back), SPC_OK);
  EXPECT_EQ(spc_dataset_rows(back), 4u);
  spc_dataset_get(back, 0, 0, &v);
  EXPECT_NEAR(v, -1.5 / std::sqrt(1.25), 1e-9);
  spc_dataset_free(back);
  spc_dataset_free(ds);
  std::filesystem::remove(path);
}

TEST(CApi, BifNetworks) {
  spc_network* net = nullptr;
  ASSERT_EQ(spc_bif_load((kData + "/bnlearn/asia.bif").c_str(), &net), SPC_OK);
  EXPECT_EQ(spc_network_num_variables(net), 8u);
  spc_graph* g = nullptr;
  ASSERT_EQ(spc_network_graph(net, &g), SPC_OK);
  EXPECT_EQ(spc_graph_num_edges(g), 8u);
  spc_dataset* ds = nullptr;
  ASSERT_EQ(spc_bif_sample(net, 500, 1, nullptr, &ds), SPC_OK);
  EXPECT_EQ(spc_dataset_rows(ds), 500u);
  char* text = nullptr;
  ASSERT_EQ(spc_bif_to_string(net, &text), SPC_OK);
  spc_network* again = nullptr;
  EXPECT_EQ(spc_bif_parse(text, &again), SPC_OK);
  spc_string_free(text);
  EXPECT_EQ(spc_bif_parse("network x { } garbage", &again), SPC_ERR_PARSE);
  spc_network_free(again);
  spc_dataset_free(ds);
  spc_graph_free(g);
  spc_network_free(net);
}

TEST(CApi, BenchAndPlotData) {
  const auto dir = std::filesystem::temp_directory_path() / "spc_capi_bench";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto csv = (dir / "r.csv").string();
  const auto json = (dir / "r.json").string();
  const auto plot = (dir / "p.csv").string();
  ASSERT_EQ(spc_bench_run(R"({"nodes": 6, "replicates": 2, "s": 20})", csv.c_str(), json.c_str()), SPC_OK);
  char* cols = nullptr;
  ASSERT_EQ(spc_result_columns(&cols), SPC_OK);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, take(cols));
  ASSERT_EQ(spc_plotdata(csv.c_str(), nullptr, plot.c_str()), SPC_OK);
  EXPECT_TRUE(std::filesystem::exists(plot));
  EXPECT_EQ(spc_bench_run(R"({"replicates": 0})", nullptr, nullptr), SPC_ERR_CONFIG);
  EXPECT_EQ(spc_plotdata(csv.c_str(), "colour", plot.c_str()), SPC_ERR_INVALID_ARGUMENT);
  double saturation = 0.0;
  ASSERT_EQ(spc_saturation(5, 0.8, &saturation), SPC_OK);
  EXPECT_NEAR(saturation, 0.4, 1e-15);
  std::filesystem::remove_all(dir);
}
