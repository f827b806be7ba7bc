#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "amp/amp_model.h"
#include "amp/engine.h"
#include "amp/graph.h"

namespace amp {

enum class TaskMode {
  // One run per start node; each run predicts its own start's label.
  kPerStart,
  // One run seeded at every marked start (start i uses origin channel i);
  // every node is predicted by every head.
  kMarked,
  // One run per start node; the mean start embedding predicts the graph label.
  kGraph,
};

struct TaskSample {
  Graph graph;
  TaskMode mode = TaskMode::kPerStart;
  // kPerStart / kGraph: run starts (all nodes when empty). kMarked: the
  // marked starts, at least one.
  std::vector<NodeId> starts;
  // node_labels[head][v]; a negative label excludes the node.
  std::vector<std::vector<int>> node_labels;
  int graph_label = -1;
};

// Runs inherit the delay model; the delivery budget is
// budget_per_node * n, or halting_cap_per_node * n for halting models.
struct RunSettings {
  DelayModel delay = DelayModel::constant(1.0);
  int budget_per_node = 5;
  int halting_cap_per_node = 50;

  long long budget_for(const AmpModel& model, int n) const;
};

struct Prediction {
  int head = 0;
  NodeId node = 0;  // predicted node; -1 for graph-level predictions
  int label = 0;
  Var logits;
};

struct SampleForward {
  std::vector<Prediction> predictions;
  long long deliveries = 0;
};

// Records the runs of one sample on `tape`. `seed` drives uniform delays;
// run r uses derive_seed(seed, r).
SampleForward forward_sample(Tape& tape, const AmpModel& model, const TaskSample& sample,
                             const RunSettings& settings, std::uint64_t seed);

struct TrainConfig {
  int iterations = 1000;
  AdamConfig adam;
  double clip_norm = 1.0;
  std::uint64_t seed = 0;
  RunSettings run;
};

struct IterationMetrics {
  int iteration = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  double grad_norm = 0.0;
};

struct TrainHistory {
  std::vector<IterationMetrics> iterations;
};

// Full-batch training: per iteration every sample is run on its own tape,
// the loss is the mean cross-entropy over all predictions, gradients are
// clipped to clip_norm and Adam takes one step. Throws NumericFailure
// carrying the iteration on a non-finite loss.
TrainHistory train(AmpModel& model, const std::vector<TaskSample>& samples, const TrainConfig& cfg,
                   const std::function<void(const IterationMetrics&)>& on_iteration = {});

struct NodePrediction {
  int sample = 0;
  int head = 0;
  NodeId node = 0;
  int label = 0;
  int predicted = 0;
};

// Evaluates every sample with a private copy of the parameters, using up to
// `jobs` threads. Sample i uses seed derive_seed(seed, i).
std::vector<NodePrediction> predict(const AmpModel& model, const std::vector<TaskSample>& samples,
                                    const RunSettings& settings, std::uint64_t seed, int jobs = 1);

// Fraction of correct predictions; 0 for an empty list.
double accuracy(const std::vector<NodePrediction>& predictions);

}  // namespace amp
