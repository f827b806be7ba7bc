#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "amp/bench.h"
#include "amp/error.h"
#include "amp/generators.h"
#include "oracles.h"

namespace amp {
namespace {

const std::string kData = AMP_TEST_DATA_DIR;

TEST(Parity, LabelsMatchAllPairsDistances) {
  for (int i = 0; i < 100; ++i) {
    Graph g = generate_spanning_tree_graph(5 + i % 20, 1000 + i);
    const auto d = testing::floyd_warshall(g);
    const NodeId start = i % g.num_nodes();
    const auto labels = parity_labels(g, start);
    for (NodeId v = 0; v < g.num_nodes(); ++v) EXPECT_EQ(labels[v], d[start][v] % 2);
  }
}

TEST(Parity, PathLabelsAlternate) {
  EXPECT_EQ(parity_labels(path_graph(5), 0), (std::vector<int>{0, 1, 0, 1, 0}));
  EXPECT_EQ(parity_labels(path_graph(5), 2), (std::vector<int>{0, 1, 0, 1, 0}));
  EXPECT_EQ(parity_labels(path_graph(4), 1), (std::vector<int>{1, 0, 1, 0}));
}

TEST(Parity, SamplesHaveDistinctStarts) {
  auto samples = parity_samples(10, 30, 3, 4);
  ASSERT_EQ(samples.size(), 30u);
  for (const auto& s : samples) {
    EXPECT_EQ(s.mode, TaskMode::kMarked);
    ASSERT_EQ(s.starts.size(), 3u);
    EXPECT_NE(s.starts[0], s.starts[1]);
    EXPECT_NE(s.starts[0], s.starts[2]);
    EXPECT_NE(s.starts[1], s.starts[2]);
    for (std::size_t h = 0; h < 3; ++h) EXPECT_EQ(s.node_labels[h][s.starts[h]], 0);
  }
  EXPECT_EQ(parity_samples(10, 5, 1, 4)[0].graph.edge_list(), parity_samples(10, 5, 1, 4)[0].graph.edge_list());
  EXPECT_THROW(parity_samples(2, 1, 3, 0), InvalidArgument);
}

TEST(Buckets, Layout) {
  std::vector<NodePrediction> preds(5);
  for (int i = 0; i < 5; ++i) preds[i].predicted = i == 4 ? 1 : 0;
  auto b = underreaching_breakdown(preds, {0, 1, 2, 3, 5});
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0].lo, 0);
  EXPECT_EQ(b[0].hi, 1);
  EXPECT_EQ(b[2].lo, 4);
  EXPECT_EQ(b[2].hi, 5);
  EXPECT_EQ(b[0].total, 2);
  EXPECT_EQ(b[1].total, 2);
  EXPECT_EQ(b[2].total, 1);
  EXPECT_EQ(b[2].correct, 0);
  EXPECT_THROW(underreaching_breakdown(preds, {0, 1}), InvalidArgument);
  EXPECT_THROW(underreaching_breakdown(preds, {0, 1, 2, 3, -1}), InvalidArgument);
}

TEST(Buckets, WeightedMeanRecoversOverallAccuracy) {
  auto samples = parity_samples(30, 10, 1, 8);
  std::vector<NodePrediction> preds;
  for (int i = 0; i < 10; ++i) {
    for (NodeId v = 0; v < 30; ++v) {
      const int label = samples[i].node_labels[0][v];
      preds.push_back({i, 0, v, label, (v % 3 == 0) ? 1 - label : label});
    }
  }
  SizeReport r;
  r.accuracy = accuracy(preds);
  r.buckets = underreaching_breakdown(preds, prediction_distances(samples, preds));
  EXPECT_NEAR(r.bucket_weighted_accuracy(), r.accuracy, 1e-12);
}

TEST(Buckets, AllEvenPredictorIsNearChance) {
  auto samples = parity_samples(50, 40, 1, 12);
  std::vector<NodePrediction> preds;
  for (int i = 0; i < 40; ++i) {
    for (NodeId v = 0; v < 50; ++v) preds.push_back({i, 0, v, samples[i].node_labels[0][v], 0});
  }
  const double acc = accuracy(preds);
  EXPECT_GT(acc, 0.35);
  EXPECT_LT(acc, 0.65);
  // Even distances are exactly the predicted class.
  auto d = prediction_distances(samples, preds);
  for (std::size_t i = 0; i < preds.size(); ++i) EXPECT_EQ(preds[i].label, d[i] % 2);
}

TEST(Buckets, RestrictedAccuracy) {
  std::vector<NodePrediction> preds(4);
  preds[0].predicted = 0;
  preds[1].predicted = 1;
  preds[2].predicted = 1;
  preds[3].predicted = 1;
  EXPECT_DOUBLE_EQ(oversmoothing_restricted(preds, {0, 1, 2, 9}, 2), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(oversmoothing_restricted(preds, {0, 1, 2, 9}, 9), 0.25);
  EXPECT_EQ(max_start_distance({}), 0);
  TaskSample s;
  s.graph = path_graph(6);
  s.mode = TaskMode::kMarked;
  s.starts = {1};
  EXPECT_EQ(max_start_distance({s}), 4);
}

TEST(Multitask, RejectsTooManyStarts) {
  ExperimentConfig cfg;
  cfg.train_n = 2;
  cfg.test_sizes = {2};
  EXPECT_THROW(oversquashing_multitask(cfg, 3), InvalidArgument);
}

TEST(ExperimentConfig, JsonRoundTrip) {
  ExperimentConfig cfg;
  cfg.model.halting = HaltingKind::kIter;
  cfg.seeds = {1, 2, 3};
  cfg.test_sizes = {10, 15};
  cfg.uniform_delays = true;
  auto back = ExperimentConfig::from_json(nlohmann::json::parse(cfg.to_json().dump()));
  EXPECT_EQ(back.to_json(), cfg.to_json());
  EXPECT_THROW(ExperimentConfig::from_json({{"seeds", nlohmann::json::array()}}), InvalidArgument);
  EXPECT_EQ(default_test_sizes(), (std::vector<int>{10, 25, 50}));
  EXPECT_EQ(extended_test_sizes().back(), 2500);
}

TEST(TuLoader, ToyDataset) {
  auto ds = load_tu_dataset(kData + "/TOY");
  ASSERT_EQ(ds.size(), 2u);
  const Graph& a = ds[0].graph;
  const Graph& b = ds[1].graph;
  EXPECT_EQ(a.num_nodes(), 3);
  EXPECT_EQ(a.num_edges(), 3);
  EXPECT_EQ(b.num_nodes(), 2);
  EXPECT_EQ(b.num_edges(), 1);
  EXPECT_EQ(*a.graph_label(), 0);
  EXPECT_EQ(*b.graph_label(), 1);
  EXPECT_EQ(a.feature_width(), 3);
  // Labels 3, 1, 3 over sorted values {1, 3, 7}.
  EXPECT_EQ(a.feature_matrix(), (std::vector<double>{0, 1, 0, 1, 0, 0, 0, 1, 0}));
  EXPECT_EQ(b.feature_matrix(), (std::vector<double>{0, 0, 1, 1, 0, 0}));
  EXPECT_EQ(ds[0].task_kind, TaskKind::kGraphClassification);
  auto sample = to_task_sample(ds[1]);
  EXPECT_EQ(sample.mode, TaskMode::kGraph);
  EXPECT_EQ(sample.graph_label, 1);
}

TEST(TuLoader, MissingNodeLabelsGiveConstantFeatures) {
  auto ds = load_tu_dataset(kData + "/PLAIN");
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].graph.feature_width(), 1);
  EXPECT_EQ(ds[0].graph.feature_matrix(), (std::vector<double>{1, 1, 1}));
  EXPECT_EQ(*ds[0].graph.graph_label(), 0);
}

TEST(TuLoader, ParseErrorsCarryLine) {
  try {
    load_tu_dataset(kData + "/BAD");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find("BAD_A.txt"), std::string::npos);
  }
  EXPECT_THROW(load_tu_dataset(kData + "/NOPE"), ParseError);
}

MetricsReport toy_report() {
  MetricsReport r;
  r.task = "parity";
  for (std::uint64_t seed : {0, 1, 2}) {
    SeedReport s;
    s.seed = seed;
    SizeReport z;
    z.size = 10;
    z.accuracy = 0.5 + 0.1 * static_cast<double>(seed);
    z.buckets = {{0, 1, 3, 4}, {2, 3, 0, 0}};
    s.sizes.push_back(z);
    r.seeds.push_back(s);
  }
  return r;
}

TEST(Results, StatsAndMedian) {
  auto r = toy_report();
  auto [mean, sd] = r.accuracy_stats(10);
  EXPECT_NEAR(mean, 0.6, 1e-12);
  EXPECT_NEAR(sd, std::sqrt(0.02 / 3.0), 1e-12);
  EXPECT_NEAR(r.median_accuracy(10), 0.6, 1e-12);
}

TEST(Results, CsvSchema) {
  const auto path = (std::filesystem::temp_directory_path() / "amp_bench_test.csv").string();
  write_results_csv(path, toy_report());
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "schema_version,task,seed,size,metric,value");
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  // accuracy, restricted_accuracy and the non-empty bucket, per seed.
  ASSERT_EQ(rows.size(), 9u);
  EXPECT_EQ(rows[0].rfind("1,parity,0,10,accuracy,", 0), 0u);
  EXPECT_EQ(rows[2].rfind("1,parity,0,10,bucket_0_1,0.75", 0), 0u);
  std::filesystem::remove(path);
}

TEST(Results, JsonCarriesSchemaVersion) {
  auto j = toy_report().to_json();
  EXPECT_EQ(j["schema_version"], kResultsSchemaVersion);
  EXPECT_EQ(j["task"], "parity");
  EXPECT_EQ(j["runs"].size(), 3u);
}

}  // namespace
}  // namespace amp
