#include "amp/color_refinement.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <utility>

namespace amp {

namespace {

// Neighbor summary as (color, weight) pairs; weights are integral counts for
// kSum, 1 for kMax and reduced fractions for kMean.
using Summary = std::vector<std::pair<int, std::pair<long, long>>>;

Summary summarize(std::vector<int> colors, Aggregation agg) {
  std::sort(colors.begin(), colors.end());
  Summary out;
  for (std::size_t i = 0; i < colors.size();) {
    std::size_t j = i;
    while (j < colors.size() && colors[j] == colors[i]) ++j;
    long count = static_cast<long>(j - i);
    long total = static_cast<long>(colors.size());
    switch (agg) {
      case Aggregation::kSum:
        out.push_back({colors[i], {count, 1}});
        break;
      case Aggregation::kMax:
        out.push_back({colors[i], {1, 1}});
        break;
      case Aggregation::kMean: {
        long g = std::gcd(count, total);
        out.push_back({colors[i], {count / g, total / g}});
        break;
      }
    }
    i = j;
  }
  return out;
}

}  // namespace

std::vector<std::vector<int>> color_refinement(const std::vector<const Graph*>& graphs,
                                               Aggregation agg) {
  std::vector<std::vector<int>> colors(graphs.size());
  std::map<std::vector<double>, int> initial;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const Graph& g = *graphs[gi];
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      auto f = g.features(v);
      std::vector<double> key(f.begin(), f.end());
      auto [it, _] = initial.emplace(key, static_cast<int>(initial.size()));
      colors[gi].push_back(it->second);
    }
  }
  std::size_t classes = initial.size();
  while (true) {
    std::map<std::pair<int, Summary>, int> palette;
    std::vector<std::vector<int>> next(graphs.size());
    for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
      const Graph& g = *graphs[gi];
      for (NodeId v = 0; v < g.num_nodes(); ++v) {
        std::vector<int> nbr;
        for (NodeId u : g.neighbors(v)) nbr.push_back(colors[gi][u]);
        auto key = std::make_pair(colors[gi][v], summarize(std::move(nbr), agg));
        auto [it, _] = palette.emplace(std::move(key), static_cast<int>(palette.size()));
        next[gi].push_back(it->second);
      }
    }
    colors = std::move(next);
    if (palette.size() == classes) break;
    classes = palette.size();
  }
  return colors;
}

bool wl_indistinguishable(const Graph& a, const Graph& b) {
  if (a.num_nodes() != b.num_nodes()) return false;
  auto colors = color_refinement({&a, &b});
  std::sort(colors[0].begin(), colors[0].end());
  std::sort(colors[1].begin(), colors[1].end());
  return colors[0] == colors[1];
}

bool root_indistinguishable(const Graph& a, const Graph& b, Aggregation agg) {
  if (a.num_nodes() == 0 || b.num_nodes() == 0) return false;
  auto colors = color_refinement({&a, &b}, agg);
  return colors[0][0] == colors[1][0];
}

}  // namespace amp
