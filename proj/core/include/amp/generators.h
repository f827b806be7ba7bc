#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "amp/graph.h"

namespace amp {

// Uniform random spanning tree on n nodes plus floor(n/5) extra edges drawn
// uniformly (without repetition) from the non-tree pairs.
Graph generate_spanning_tree_graph(int n, std::uint64_t seed);

// Connected random graph with every degree at most max_degree (>= 2): a
// random attachment tree plus up to n/2 extra edges that respect the bound.
// Features are uniform in [-1, 1] with width d_in.
Graph generate_bounded_degree_graph(int n, int max_degree, int d_in, std::uint64_t seed);

// Instance A: two disjoint 4-cycles. Instance B: one 8-cycle. All features
// are 1; node label 0 marks a 4-cycle node, 1 an 8-cycle node.
std::pair<Graph, Graph> generate_cycle_pair();

// Step between chord endpoints for a skip-cycle of the given length.
int skip_cycle_step(int length);

// One graph per length: the cycle 0..n-1 plus chords {i, i+skip mod n} with
// skip = floor(n/2) - 1. graph_label is the index into `lengths`.
std::vector<DatasetInstance> generate_skip_cycles(const std::vector<int>& lengths);

enum class LocalStructureLabel { kTriangles, kLcc };

// Label class in {0, 1, 2, 3}: triangle count capped at 3, or the local
// clustering coefficient bucketed as 0, (0,1/3], (1/3,2/3], (2/3,1].
int triangle_class(std::int64_t triangles);
int lcc_class(std::int64_t triangles, int degree);

// Connected Erdos-Renyi graphs with mean degree about 4 and node labels from
// the brute-force triangle/LCC oracle.
std::vector<DatasetInstance> generate_triangle_lcc_data(int n_graphs, int n,
                                                        std::uint64_t seed,
                                                        LocalStructureLabel label);

// Star with center 0 and outer nodes 1..k, plus every outer-outer edge.
Graph star_graph(int k);

Graph path_graph(int n);
Graph cycle_graph(int n);

}  // namespace amp
