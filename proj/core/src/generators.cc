#include "amp/generators.h"

#include <algorithm>
#include <random>
#include <set>
#include <string>

#include "amp/error.h"

namespace amp {

namespace {

using Edge = std::pair<NodeId, NodeId>;

Edge ordered(NodeId u, NodeId v) { return u < v ? Edge{u, v} : Edge{v, u}; }

// Decodes a uniformly random Pruefer sequence into a uniformly random
// labeled tree.
std::vector<Edge> random_tree(int n, std::mt19937_64& rng) {
  std::vector<Edge> edges;
  if (n == 2) {
    edges.emplace_back(0, 1);
    return edges;
  }
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<int> code(n - 2);
  for (int& c : code) c = pick(rng);
  std::vector<int> degree(n, 1);
  for (int c : code) ++degree[c];
  std::set<int> leaves;
  for (int v = 0; v < n; ++v) {
    if (degree[v] == 1) leaves.insert(v);
  }
  for (int c : code) {
    int leaf = *leaves.begin();
    leaves.erase(leaves.begin());
    edges.push_back(ordered(leaf, c));
    if (--degree[c] == 1) leaves.insert(c);
  }
  int a = *leaves.begin();
  int b = *std::next(leaves.begin());
  edges.push_back(ordered(a, b));
  return edges;
}

}  // namespace

Graph generate_spanning_tree_graph(int n, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("spanning tree graph needs n >= 2, got " + std::to_string(n));
  std::mt19937_64 rng(seed);
  std::vector<Edge> edges = random_tree(n, rng);
  std::set<Edge> present(edges.begin(), edges.end());
  const int extras = n / 5;
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int added = 0; added < extras;) {
    int u = pick(rng);
    int v = pick(rng);
    if (u == v) continue;
    if (present.insert(ordered(u, v)).second) {
      edges.push_back(ordered(u, v));
      ++added;
    }
  }
  return Graph::from_edges(n, edges);
}

Graph generate_bounded_degree_graph(int n, int max_degree, int d_in, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("graph needs at least one node");
  if (max_degree < 2) throw InvalidArgument("max_degree must be >= 2");
  if (d_in < 1) throw InvalidArgument("feature width must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<int> deg(n, 0);
  std::set<std::pair<NodeId, NodeId>> edges;
  for (NodeId v = 1; v < n; ++v) {
    std::vector<NodeId> open;
    for (NodeId u = 0; u < v; ++u) {
      if (deg[u] < max_degree) open.push_back(u);
    }
    std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
    const NodeId u = open[pick(rng)];
    edges.emplace(u, v);
    ++deg[u];
    ++deg[v];
  }
  if (n >= 3) {
    std::uniform_int_distribution<NodeId> node(0, n - 1);
    for (int tries = 0, added = 0; added < n / 2 && tries < 20 * n; ++tries) {
      NodeId a = node(rng);
      NodeId b = node(rng);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      if (deg[a] >= max_degree || deg[b] >= max_degree || edges.count({a, b})) continue;
      edges.emplace(a, b);
      ++deg[a];
      ++deg[b];
      ++added;
    }
  }
  std::uniform_real_distribution<double> feat(-1.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(n) * d_in);
  for (double& f : x) f = feat(rng);
  std::vector<std::pair<NodeId, NodeId>> list(edges.begin(), edges.end());
  return Graph::from_edges(n, list, std::move(x), d_in);
}

Graph cycle_graph(int n) {
  if (n < 3) throw InvalidArgument("cycle needs n >= 3");
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) edges.push_back(ordered(i, (i + 1) % n));
  return Graph::from_edges(n, edges);
}

Graph path_graph(int n) {
  if (n < 1) throw InvalidArgument("path needs n >= 1");
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Graph::from_edges(n, edges);
}

std::pair<Graph, Graph> generate_cycle_pair() {
  std::vector<Edge> two_squares;
  for (int base : {0, 4}) {
    for (int i = 0; i < 4; ++i) two_squares.push_back(ordered(base + i, base + (i + 1) % 4));
  }
  Graph a = Graph::from_edges(8, two_squares).with_node_labels(std::vector<int>(8, 0));
  Graph b = cycle_graph(8).with_node_labels(std::vector<int>(8, 1));
  return {a, b};
}

int skip_cycle_step(int length) { return length / 2 - 1; }

std::vector<DatasetInstance> generate_skip_cycles(const std::vector<int>& lengths) {
  std::vector<DatasetInstance> out;
  for (std::size_t cls = 0; cls < lengths.size(); ++cls) {
    const int n = lengths[cls];
    if (n < 9) throw InvalidArgument("skip-cycle length must be >= 9, got " + std::to_string(n));
    const int skip = skip_cycle_step(n);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
      edges.push_back(ordered(i, (i + 1) % n));
      edges.push_back(ordered(i, (i + skip) % n));
    }
    DatasetInstance inst;
    inst.graph = Graph::from_edges(n, edges).with_graph_label(static_cast<int>(cls));
    inst.task_kind = TaskKind::kGraphClassification;
    out.push_back(std::move(inst));
  }
  return out;
}

int triangle_class(std::int64_t triangles) {
  return static_cast<int>(std::min<std::int64_t>(triangles, 3));
}

int lcc_class(std::int64_t triangles, int degree) {
  if (triangles == 0 || degree < 2) return 0;
  const std::int64_t pairs = static_cast<std::int64_t>(degree) * (degree - 1) / 2;
  if (3 * triangles <= pairs) return 1;
  if (3 * triangles <= 2 * pairs) return 2;
  return 3;
}

std::vector<DatasetInstance> generate_triangle_lcc_data(int n_graphs, int n, std::uint64_t seed,
                                                        LocalStructureLabel label) {
  if (n < 4) throw InvalidArgument("triangle/LCC graphs need n >= 4");
  if (n_graphs < 0) throw InvalidArgument("negative graph count");
  std::mt19937_64 rng(seed);
  const double p = std::min(1.0, 4.0 / (n - 1));
  std::bernoulli_distribution coin(p);
  std::vector<DatasetInstance> out;
  while (static_cast<int>(out.size()) < n_graphs) {
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) {
        if (coin(rng)) edges.emplace_back(u, v);
      }
    }
    Graph g = Graph::from_edges(n, edges);
    if (!is_connected(g)) continue;
    auto tri = triangle_counts(g);
    std::vector<int> labels(n);
    for (int v = 0; v < n; ++v) {
      labels[v] = label == LocalStructureLabel::kTriangles ? triangle_class(tri[v])
                                                          : lcc_class(tri[v], g.degree(v));
    }
    DatasetInstance inst;
    inst.graph = g.with_node_labels(std::move(labels));
    inst.task_kind = TaskKind::kNodeClassification;
    out.push_back(std::move(inst));
  }
  return out;
}

Graph star_graph(int k) {
  if (k < 1) throw InvalidArgument("star needs k >= 1, got " + std::to_string(k));
  std::vector<Edge> edges;
  for (int i = 1; i <= k; ++i) {
    edges.emplace_back(0, i);
    for (int j = i + 1; j <= k; ++j) edges.emplace_back(i, j);
  }
  return Graph::from_edges(k + 1, edges);
}

}  // namespace amp
