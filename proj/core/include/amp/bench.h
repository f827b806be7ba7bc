#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "amp/amp_model.h"
#include "amp/graph.h"
#include "amp/train.h"

namespace amp {

inline constexpr int kResultsSchemaVersion = 1;

// Parity of shortest-path distances from `start`: 0 even, 1 odd.
std::vector<int> parity_labels(const Graph& g, NodeId start);

// Spanning-tree graphs of size n, each with a uniformly drawn marked start
// and one head of parity labels per start (k heads, k distinct starts).
// Throws InvalidArgument when n < k.
std::vector<TaskSample> parity_samples(int n, int count, int k, std::uint64_t seed);

// Converts a labeled instance. Node tasks use one run per start node unless
// start_marks is non-empty, in which case the marks seed a single run.
TaskSample to_task_sample(const DatasetInstance& inst);

struct BucketAccuracy {
  int lo = 0;
  int hi = 1;
  long long correct = 0;
  long long total = 0;
  double accuracy() const { return total ? static_cast<double>(correct) / total : 0.0; }
};

// distances[i] belongs to predictions[i]. Buckets 0-1, 2-3, ... up to the
// largest distance; empty buckets report total 0.
std::vector<BucketAccuracy> underreaching_breakdown(const std::vector<NodePrediction>& predictions,
                                                    const std::vector<int>& distances);

// Accuracy over predictions whose distance is at most train_max_distance.
double oversmoothing_restricted(const std::vector<NodePrediction>& predictions,
                                const std::vector<int>& distances, int train_max_distance);

// Distance of each node prediction from the start that defines its head.
std::vector<int> prediction_distances(const std::vector<TaskSample>& samples,
                                      const std::vector<NodePrediction>& predictions);

// Largest start distance over all samples.
int max_start_distance(const std::vector<TaskSample>& samples);

struct ExperimentConfig {
  std::string task = "parity";
  AmpCellConfig model;
  std::vector<std::uint64_t> seeds{0};
  int train_n = 10;
  int train_graphs = 25;
  std::vector<int> test_sizes{10, 25, 50};
  int test_graphs = 20;
  int iterations = 1000;
  double lr = 0.01;
  int budget_per_node = 10;
  int halting_cap_per_node = 50;
  bool uniform_delays = false;
  int tasks = 1;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  RunSettings run_settings() const;
};

// Parity test sizes: {10, 25, 50} by default, the long list up to 2500 is
// opt-in.
std::vector<int> default_test_sizes();
std::vector<int> extended_test_sizes();

struct SizeReport {
  int size = 0;
  double accuracy = 0.0;
  long long predictions = 0;
  std::vector<BucketAccuracy> buckets;
  double restricted_accuracy = 0.0;
  // Bucket-weighted mean of the bucket accuracies.
  double bucket_weighted_accuracy() const;
};

struct SeedReport {
  std::uint64_t seed = 0;
  double final_loss = 0.0;
  double train_accuracy = 0.0;
  int train_max_distance = 0;
  std::vector<SizeReport> sizes;
};

struct MetricsReport {
  std::string task;
  std::vector<SeedReport> seeds;

  // Mean and population standard deviation of the accuracy at `size`.
  std::pair<double, double> accuracy_stats(int size) const;
  double median_accuracy(int size) const;
  nlohmann::ordered_json to_json() const;
};

// Trains one model on parity_samples(train_n, train_graphs, tasks) drawn
// from derive_seed(seed, 1). The model is initialized from
// derive_seed(seed, 3).
AmpModel train_parity_model(const ExperimentConfig& cfg, std::uint64_t seed,
                            TrainHistory* history = nullptr,
                            const std::function<void(const IterationMetrics&)>& on_iteration = {});
std::vector<TaskSample> parity_train_set(const ExperimentConfig& cfg, std::uint64_t seed);
// test_graphs fresh graphs per size from a stream disjoint from training.
std::vector<TaskSample> parity_test_set(const ExperimentConfig& cfg, std::uint64_t seed, int size);
SizeReport evaluate_parity_size(const AmpModel& model, const ExperimentConfig& cfg,
                                std::uint64_t seed, int size, int train_max_distance, int jobs = 1);

// Training followed by evaluation at every test size.
SeedReport run_parity_seed(const ExperimentConfig& cfg, std::uint64_t seed, int jobs = 1);
MetricsReport run_parity_experiment(const ExperimentConfig& cfg, int jobs = 1);

struct OversquashingReport {
  int k = 3;
  MetricsReport single_task;
  MetricsReport multi_task;
  nlohmann::ordered_json to_json() const;
};

// The same experiment with one start per graph and with k starts per graph.
OversquashingReport oversquashing_multitask(const ExperimentConfig& cfg, int k, int jobs = 1);

struct CyclePairResult {
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double final_loss = 0.0;
};

// Trains on both cycle-pair instances and `relabelings` random node
// relabelings of each, tests on `relabelings` fresh relabelings of each.
CyclePairResult run_cycle_pair(const AmpCellConfig& model, int iterations, double lr,
                               int relabelings, std::uint64_t seed, AmpModel* trained = nullptr);

// Standard TU layout: <dir>/<name>_A.txt, _graph_indicator.txt,
// _graph_labels.txt and optional _node_labels.txt (1-indexed). `name`
// defaults to the directory's base name. Node labels become one-hot
// features over the sorted distinct values; graph labels are remapped to
// 0..C-1 in sorted order.
std::vector<DatasetInstance> load_tu_dataset(const std::string& dir, std::string name = "");

// Rows: schema_version,task,seed,size,metric,value with metrics accuracy, restricted_accuracy
// and bucket_<lo>_<hi>.
void write_results_csv(const std::string& path, const MetricsReport& report);
void write_json(const std::string& path, const nlohmann::ordered_json& j);

}  // namespace amp
