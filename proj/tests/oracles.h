#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "amp/graph.h"

namespace amp::testing {

// All-pairs distances by Floyd-Warshall; -1 for unreachable pairs.
inline std::vector<std::vector<int>> floyd_warshall(const Graph& g) {
  const int n = g.num_nodes();
  const int inf = std::numeric_limits<int>::max() / 4;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (int v = 0; v < n; ++v) {
    d[v][v] = 0;
    for (NodeId u : g.neighbors(v)) d[v][u] = 1;
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  for (auto& row : d)
    for (int& x : row)
      if (x >= inf) x = -1;
  return d;
}

// Triangles per node by enumerating all node triples.
inline std::vector<std::int64_t> brute_triangles(const Graph& g) {
  const int n = g.num_nodes();
  std::vector<std::int64_t> t(n, 0);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c)
        if (g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c)) {
          ++t[a];
          ++t[b];
          ++t[c];
        }
  return t;
}

// Synchronous layer-by-layer reference written directly from the definition
// h_{l+1}(v) = ReLU(W_l * sum_{u in N(v)} h_l(u) + b_l).
inline std::vector<std::vector<double>> naive_sgin(const Graph& g,
                                                   const std::vector<std::vector<double>>& Ws,
                                                   const std::vector<std::vector<double>>& bs,
                                                   int d) {
  const int n = g.num_nodes();
  std::vector<std::vector<double>> h(n);
  for (int v = 0; v < n; ++v) {
    auto f = g.features(v);
    h[v].assign(f.begin(), f.end());
  }
  for (std::size_t l = 0; l < Ws.size(); ++l) {
    std::vector<std::vector<double>> next(n, std::vector<double>(d, 0.0));
    for (int v = 0; v < n; ++v) {
      std::vector<double> sum(d, 0.0);
      for (NodeId u : g.neighbors(v))
        for (int k = 0; k < d; ++k) sum[k] += h[u][k];
      for (int r = 0; r < d; ++r) {
        double acc = bs.empty() ? 0.0 : bs[l][r];
        for (int c = 0; c < d; ++c) acc += Ws[l][r * d + c] * sum[c];
        next[v][r] = acc > 0 ? acc : 0.0;
      }
    }
    h = std::move(next);
  }
  return h;
}

}  // namespace amp::testing
