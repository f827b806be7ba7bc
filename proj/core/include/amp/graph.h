#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace amp {

using NodeId = std::int32_t;

// Immutable undirected simple graph with per-node feature vectors and
// optional node- or graph-level labels.
//
// Invariants (checked on construction): neighbor lists are strictly sorted,
// symmetric, free of self-loops; every node has a feature row of width
// feature_width().
class Graph {
 public:
  Graph() = default;

  // Builds from an undirected edge list. Duplicate edges (in either
  // orientation) are merged; self-loops and out-of-range endpoints throw
  // InvalidArgument. `features` is row-major n x d_in; an empty vector means
  // constant-1 features of width 1.
  static Graph from_edges(int n, std::span<const std::pair<NodeId, NodeId>> edges,
                          std::vector<double> features = {}, int d_in = 1);

  int num_nodes() const { return static_cast<int>(adjacency_.size()); }
  std::int64_t num_edges() const { return num_edges_; }
  int degree(NodeId v) const { return static_cast<int>(adjacency_[v].size()); }
  std::span<const NodeId> neighbors(NodeId v) const { return adjacency_[v]; }
  bool has_edge(NodeId u, NodeId v) const;

  int feature_width() const { return d_in_; }
  std::span<const double> features(NodeId v) const {
    return {features_.data() + static_cast<std::size_t>(v) * d_in_,
            static_cast<std::size_t>(d_in_)};
  }
  const std::vector<double>& feature_matrix() const { return features_; }

  // Edges as (u, v) with u < v, sorted lexicographically.
  std::vector<std::pair<NodeId, NodeId>> edge_list() const;

  const std::optional<std::vector<int>>& node_labels() const { return node_labels_; }
  const std::optional<int>& graph_label() const { return graph_label_; }

  Graph with_node_labels(std::vector<int> labels) const;
  Graph with_graph_label(int label) const;
  Graph with_features(std::vector<double> features, int d_in) const;

  // Relabels nodes: node v of this graph becomes node perm[v].
  Graph permuted(std::span<const NodeId> perm) const;

  bool operator==(const Graph&) const = default;

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<double> features_;
  int d_in_ = 1;
  std::int64_t num_edges_ = 0;
  std::optional<std::vector<int>> node_labels_;
  std::optional<int> graph_label_;
};

enum class TaskKind {
  kNodeClassification,
  kGraphClassification,
  kMultiStartNodeClassification,
};

struct DatasetInstance {
  Graph graph;
  TaskKind task_kind = TaskKind::kNodeClassification;
  // Start nodes for the parity tasks; empty when every node starts a run.
  std::vector<NodeId> start_marks;

  // Throws ContractViolation when the label presence does not match the task.
  void validate() const;
};

// Exact unweighted distances from `start`; -1 marks unreachable nodes.
std::vector<int> bfs_distances(const Graph& g, NodeId start);

bool is_connected(const Graph& g);

// Sizes of the connected components, sorted ascending.
std::vector<int> component_sizes(const Graph& g);

// Number of triangles through each node.
std::vector<std::int64_t> triangle_counts(const Graph& g);

}  // namespace amp
