#include "amp/graph.h"

#include <algorithm>
#include <deque>
#include <string>

#include "amp/error.h"

namespace amp {

Graph Graph::from_edges(int n, std::span<const std::pair<NodeId, NodeId>> edges,
                        std::vector<double> features, int d_in) {
  if (n < 0) throw InvalidArgument("negative node count");
  if (d_in < 1) throw InvalidArgument("feature width must be positive");
  Graph g;
  g.adjacency_.assign(n, {});
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw InvalidArgument("edge endpoint out of range: " + std::to_string(u) + " " +
                            std::to_string(v));
    }
    if (u == v) throw InvalidArgument("self-loop at node " + std::to_string(u));
    g.adjacency_[u].push_back(v);
    g.adjacency_[v].push_back(u);
  }
  std::int64_t total = 0;
  for (auto& nbrs : g.adjacency_) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    total += static_cast<std::int64_t>(nbrs.size());
  }
  g.num_edges_ = total / 2;
  if (features.empty()) {
    g.d_in_ = 1;
    g.features_.assign(n, 1.0);
  } else {
    if (features.size() != static_cast<std::size_t>(n) * d_in) {
      throw InvalidArgument("feature matrix has " + std::to_string(features.size()) +
                            " entries, expected " + std::to_string(n * d_in));
    }
    g.d_in_ = d_in;
    g.features_ = std::move(features);
  }
  return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  auto nbrs = neighbors(u);
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

std::vector<std::pair<NodeId, NodeId>> Graph::edge_list() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(num_edges_);
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (NodeId v : adjacency_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

Graph Graph::with_node_labels(std::vector<int> labels) const {
  if (labels.size() != adjacency_.size()) {
    throw InvalidArgument("node label count does not match node count");
  }
  Graph g = *this;
  g.node_labels_ = std::move(labels);
  return g;
}

Graph Graph::with_graph_label(int label) const {
  Graph g = *this;
  g.graph_label_ = label;
  return g;
}

Graph Graph::with_features(std::vector<double> features, int d_in) const {
  if (d_in < 1 || features.size() != adjacency_.size() * d_in) {
    throw InvalidArgument("feature matrix shape does not match node count");
  }
  Graph g = *this;
  g.features_ = std::move(features);
  g.d_in_ = d_in;
  return g;
}

Graph Graph::permuted(std::span<const NodeId> perm) const {
  const int n = num_nodes();
  if (static_cast<int>(perm.size()) != n) throw InvalidArgument("permutation size mismatch");
  std::vector<char> seen(n, 0);
  for (NodeId p : perm) {
    if (p < 0 || p >= n || seen[p]) throw InvalidArgument("not a permutation");
    seen[p] = 1;
  }
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (auto [u, v] : edge_list()) edges.emplace_back(perm[u], perm[v]);
  std::vector<double> feats(features_.size());
  for (NodeId v = 0; v < n; ++v) {
    std::copy_n(features_.begin() + static_cast<std::ptrdiff_t>(v) * d_in_, d_in_,
                feats.begin() + static_cast<std::ptrdiff_t>(perm[v]) * d_in_);
  }
  Graph g = from_edges(n, edges, std::move(feats), d_in_);
  if (node_labels_) {
    std::vector<int> labels(n);
    for (NodeId v = 0; v < n; ++v) labels[perm[v]] = (*node_labels_)[v];
    g.node_labels_ = std::move(labels);
  }
  g.graph_label_ = graph_label_;
  return g;
}

void DatasetInstance::validate() const {
  const bool node_task = task_kind != TaskKind::kGraphClassification;
  if (node_task && !graph.node_labels()) {
    throw ContractViolation("node-level task without node labels");
  }
  if (node_task && graph.graph_label()) {
    throw ContractViolation("node-level task carries a graph label");
  }
  if (!node_task && !graph.graph_label()) {
    throw ContractViolation("graph-level task without a graph label");
  }
  if (!node_task && graph.node_labels()) {
    throw ContractViolation("graph-level task carries node labels");
  }
  for (NodeId s : start_marks) {
    if (s < 0 || s >= graph.num_nodes()) throw ContractViolation("start mark out of range");
  }
}

std::vector<int> bfs_distances(const Graph& g, NodeId start) {
  if (start < 0 || start >= g.num_nodes()) {
    throw InvalidArgument("start node " + std::to_string(start) + " out of range");
  }
  std::vector<int> dist(g.num_nodes(), -1);
  std::deque<NodeId> queue{start};
  dist[start] = 0;
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : g.neighbors(u)) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

std::vector<int> component_sizes(const Graph& g) {
  std::vector<int> comp(g.num_nodes(), -1);
  std::vector<int> sizes;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    if (comp[s] >= 0) continue;
    int id = static_cast<int>(sizes.size());
    int size = 0;
    std::vector<NodeId> stack{s};
    comp[s] = id;
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      ++size;
      for (NodeId v : g.neighbors(u)) {
        if (comp[v] < 0) {
          comp[v] = id;
          stack.push_back(v);
        }
      }
    }
    sizes.push_back(size);
  }
  std::sort(sizes.begin(), sizes.end());
  return sizes;
}

bool is_connected(const Graph& g) { return component_sizes(g).size() <= 1; }

std::vector<std::int64_t> triangle_counts(const Graph& g) {
  std::vector<std::int64_t> count(g.num_nodes(), 0);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    auto nbrs = g.neighbors(v);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      for (std::size_t j = i + 1; j < nbrs.size(); ++j) {
        if (g.has_edge(nbrs[i], nbrs[j])) ++count[v];
      }
    }
  }
  return count;
}

}  // namespace amp
