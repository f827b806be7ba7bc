#pragma once

#include <vector>

#include "amp/graph.h"

namespace amp {

// How a node summarizes its neighbors' colors in one refinement round.
// kSum is the multiset (1-WL); kMax keeps only the set of colors; kMean keeps
// the normalized color distribution.
enum class Aggregation { kSum, kMax, kMean };

// Stable colors for a batch of graphs refined jointly, so colors are
// comparable across graphs. Initial colors come from the feature rows.
// Returns one color vector per graph.
std::vector<std::vector<int>> color_refinement(const std::vector<const Graph*>& graphs,
                                               Aggregation agg = Aggregation::kSum);

// True when joint 1-WL refinement yields identical color multisets.
bool wl_indistinguishable(const Graph& a, const Graph& b);

// True when refinement under `agg` gives node 0 of both graphs the same
// stable color.
bool root_indistinguishable(const Graph& a, const Graph& b, Aggregation agg);

}  // namespace amp
