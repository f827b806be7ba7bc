#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "amp/color_refinement.h"
#include "amp/error.h"
#include "amp/generators.h"
#include "amp/graph.h"
#include "amp/graph_io.h"
#include "oracles.h"

namespace amp {
namespace {

using Edges = std::vector<std::pair<NodeId, NodeId>>;

void expect_well_formed(const Graph& g) {
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    auto nb = g.neighbors(v);
    EXPECT_TRUE(std::is_sorted(nb.begin(), nb.end()));
    EXPECT_TRUE(std::adjacent_find(nb.begin(), nb.end()) == nb.end());
    for (NodeId u : nb) {
      EXPECT_NE(u, v);
      EXPECT_TRUE(g.has_edge(u, v));
    }
  }
}

TEST(Graph, FromEdgesDedupsBothOrientations) {
  Edges e{{0, 1}, {1, 0}, {1, 2}, {2, 1}, {1, 2}};
  Graph g = Graph::from_edges(3, e);
  EXPECT_EQ(g.num_edges(), 2);
  EXPECT_EQ(g.degree(1), 2);
  expect_well_formed(g);
  EXPECT_EQ(g.feature_width(), 1);
  EXPECT_EQ(g.features(2)[0], 1.0);
}

TEST(Graph, RejectsSelfLoopsAndRange) {
  Edges loop{{1, 1}};
  EXPECT_THROW(Graph::from_edges(2, loop), InvalidArgument);
  Edges out{{0, 5}};
  EXPECT_THROW(Graph::from_edges(2, out), InvalidArgument);
  EXPECT_THROW(Graph::from_edges(2, {}, {1.0, 2.0, 3.0}, 1), InvalidArgument);
}

TEST(Graph, PermutedMovesLabelsWithNodes) {
  Graph g = path_graph(3).with_node_labels({0, 1, 2});
  std::vector<NodeId> perm{2, 0, 1};
  Graph p = g.permuted(perm);
  EXPECT_TRUE(p.has_edge(2, 0));
  EXPECT_TRUE(p.has_edge(0, 1));
  EXPECT_FALSE(p.has_edge(2, 1));
  EXPECT_EQ((*p.node_labels())[2], 0);
  EXPECT_EQ((*p.node_labels())[0], 1);
}

TEST(Graph, DatasetInstanceLabelPresence) {
  DatasetInstance node{path_graph(2), TaskKind::kNodeClassification, {}};
  EXPECT_THROW(node.validate(), ContractViolation);
  node.graph = node.graph.with_node_labels({0, 1});
  EXPECT_NO_THROW(node.validate());
  DatasetInstance graph{path_graph(2).with_graph_label(1), TaskKind::kGraphClassification, {}};
  EXPECT_NO_THROW(graph.validate());
  graph.graph = graph.graph.with_node_labels({0, 0});
  EXPECT_THROW(graph.validate(), ContractViolation);
}

TEST(SpanningTreeGraph, EdgeCounts) {
  EXPECT_EQ(generate_spanning_tree_graph(10, 1).num_edges(), 11);
  EXPECT_EQ(generate_spanning_tree_graph(2, 1).num_edges(), 1);
  Graph g = generate_spanning_tree_graph(25, 7);
  EXPECT_EQ(g.num_edges(), 29);
  for (int d : bfs_distances(g, 0)) EXPECT_GE(d, 0);
  EXPECT_THROW(generate_spanning_tree_graph(1, 0), InvalidArgument);
}

TEST(SpanningTreeGraph, DeterministicAndConnected) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const int n = 2 + static_cast<int>(s % 40);
    Graph a = generate_spanning_tree_graph(n, s);
    EXPECT_EQ(a, generate_spanning_tree_graph(n, s));
    EXPECT_TRUE(is_connected(a));
    EXPECT_EQ(a.num_edges(), n - 1 + n / 5);
    expect_well_formed(a);
  }
}

TEST(CyclePair, ShapeAndHardness) {
  auto [a, b] = generate_cycle_pair();
  EXPECT_EQ(a.num_nodes(), 8);
  EXPECT_EQ(b.num_nodes(), 8);
  EXPECT_EQ(a.num_edges(), 8);
  EXPECT_EQ(b.num_edges(), 8);
  EXPECT_EQ(component_sizes(a), (std::vector<int>{4, 4}));
  EXPECT_EQ(component_sizes(b), (std::vector<int>{8}));
  for (NodeId v = 0; v < 8; ++v) {
    EXPECT_EQ(a.degree(v), 2);
    EXPECT_EQ(b.degree(v), 2);
  }
  auto colors = color_refinement({&a, &b});
  std::set<int> all(colors[0].begin(), colors[0].end());
  all.insert(colors[1].begin(), colors[1].end());
  EXPECT_EQ(all.size(), 1u);
  EXPECT_TRUE(wl_indistinguishable(a, b));
}

TEST(SkipCycles, Construction) {
  auto one = generate_skip_cycles({9});
  ASSERT_EQ(one.size(), 1u);
  const Graph& g = one[0].graph;
  const int skip = skip_cycle_step(9);
  EXPECT_EQ(skip, 3);
  for (NodeId i = 0; i < 9; ++i) {
    EXPECT_TRUE(g.has_edge(i, (i + 1) % 9));
    EXPECT_TRUE(g.has_edge(i, (i + skip) % 9));
    EXPECT_EQ(g.degree(i), 4);
  }
  EXPECT_EQ(g.num_edges(), 18);
  auto two = generate_skip_cycles({11, 13});
  EXPECT_NE(*two[0].graph.graph_label(), *two[1].graph.graph_label());
  EXPECT_THROW(generate_skip_cycles({8}), InvalidArgument);
}

TEST(TriangleLcc, SmallCases) {
  Edges k4;
  for (NodeId i = 0; i < 4; ++i)
    for (NodeId j = i + 1; j < 4; ++j) k4.emplace_back(i, j);
  for (auto t : triangle_counts(Graph::from_edges(4, k4))) EXPECT_EQ(t, 3);
  Graph c5 = cycle_graph(5);
  for (NodeId v = 0; v < 5; ++v) {
    EXPECT_EQ(triangle_counts(c5)[v], 0);
    EXPECT_EQ(lcc_class(0, c5.degree(v)), 0);
  }
  EXPECT_EQ(triangle_class(7), 3);
  EXPECT_EQ(lcc_class(1, 3), 1);  // 1/3
  EXPECT_EQ(lcc_class(2, 3), 2);  // 2/3
  EXPECT_EQ(lcc_class(3, 3), 3);  // 1
}

TEST(TriangleLcc, LabelsMatchBruteForce) {
  for (auto kind : {LocalStructureLabel::kTriangles, LocalStructureLabel::kLcc}) {
    for (const auto& inst : generate_triangle_lcc_data(10, 8, 5, kind)) {
      const Graph& g = inst.graph;
      EXPECT_TRUE(is_connected(g));
      auto t = testing::brute_triangles(g);
      for (NodeId v = 0; v < g.num_nodes(); ++v) {
        const int want = kind == LocalStructureLabel::kTriangles ? triangle_class(t[v])
                                                                 : lcc_class(t[v], g.degree(v));
        EXPECT_EQ((*g.node_labels())[v], want);
      }
    }
  }
}

TEST(Bfs, PathAndOracle) {
  EXPECT_EQ(bfs_distances(path_graph(3), 0), (std::vector<int>{0, 1, 2}));
  EXPECT_THROW(bfs_distances(path_graph(3), 3), InvalidArgument);
  for (std::uint64_t s = 0; s < 20; ++s) {
    Graph g = generate_spanning_tree_graph(12, s);
    auto fw = testing::floyd_warshall(g);
    for (NodeId v = 0; v < 12; ++v) EXPECT_EQ(bfs_distances(g, v), fw[v]);
  }
  Edges split{{0, 1}};
  EXPECT_EQ(bfs_distances(Graph::from_edges(3, split), 0), (std::vector<int>{0, 1, -1}));
}

TEST(StarGraph, Shapes) {
  EXPECT_EQ(star_graph(1).num_edges(), 1);
  Graph k3 = star_graph(3);
  EXPECT_EQ(k3.num_edges(), 6);
  for (NodeId v = 0; v < 4; ++v) EXPECT_EQ(k3.degree(v), 3);
  Graph k5 = star_graph(5);
  EXPECT_EQ(k5.num_nodes(), 6);
  EXPECT_EQ(k5.num_edges(), 15);
  EXPECT_THROW(star_graph(0), InvalidArgument);
}

TEST(BoundedDegreeGraph, RespectsBound) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    Graph g = generate_bounded_degree_graph(2 + static_cast<int>(s % 11), 5, 3, s);
    EXPECT_TRUE(is_connected(g));
    EXPECT_EQ(g.feature_width(), 3);
    for (NodeId v = 0; v < g.num_nodes(); ++v) EXPECT_LE(g.degree(v), 5);
  }
}

TEST(GraphIo, RoundTrip) {
  Edges e{{0, 1}, {1, 2}};
  Graph g = Graph::from_edges(3, e, {0.5, 1.0, -2.0, 3.0, 0.0, 0.25}, 2);
  std::stringstream ss;
  write_graph(ss, g);
  EXPECT_EQ(read_graph(ss), g);
}

TEST(GraphIo, ParseErrorsCarryLine) {
  std::istringstream in("# header\n2 1\n1.0\n1.0\n0 x\n");
  try {
    read_graph(in, "bad.txt");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5);
  }
}

TEST(FixedConstructions, PairsAreHardForTheirAggregation) {
  std::ifstream in(std::string(AMP_REPO_DATA_DIR) + "/fixed_constructions.txt");
  ASSERT_TRUE(in);
  auto cons = read_fixed_constructions(in, "fixed_constructions.txt");
  ASSERT_EQ(cons.size(), 4u);
  for (const auto& c : cons) {
    ASSERT_EQ(c.graphs.size(), 2u) << c.name;
    const Graph& a = c.graphs[0];
    const Graph& b = c.graphs[1];
    if (c.hardness == "1wl") {
      EXPECT_TRUE(wl_indistinguishable(a, b)) << c.name;
      EXPECT_NE(component_sizes(a), component_sizes(b)) << c.name;
    } else {
      const Aggregation agg = c.hardness == "max" ? Aggregation::kMax : Aggregation::kMean;
      EXPECT_TRUE(root_indistinguishable(a, b, agg)) << c.name;
      EXPECT_FALSE(root_indistinguishable(a, b, Aggregation::kSum)) << c.name;
    }
  }
}

}  // namespace
}  // namespace amp
