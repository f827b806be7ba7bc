#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "amp/graph.h"

namespace amp {

// One sGIN layer: h' = ReLU(W * sum + b) with W square of width d.
struct SginWeights {
  int d = 1;
  std::vector<double> W;  // row-major d x d
  std::vector<double> b;  // empty means zero bias

  static SginWeights identity(int d);
  void validate() const;

  // ReLU(W x + b), accumulated in index order.
  std::vector<double> apply(std::span<const double> x) const;
  double max_abs_weight() const;
  double max_abs_bias() const;
};

struct SginModel {
  int d = 1;
  std::vector<SginWeights> layers;

  int num_layers() const { return static_cast<int>(layers.size()); }
  void validate() const;
};

// Entries uniform in [-scale, scale]; biases zero unless `with_bias`.
SginModel random_sgin_model(int d, int layers, std::uint64_t seed, double scale = 1.0,
                            bool with_bias = false);

using NodeVectors = std::vector<std::vector<double>>;

NodeVectors feature_vectors(const Graph& g);

// Synchronous reference: h0 = x, h_{l+1}(v) = ReLU(W_l * sum_{u in N(v)} h_l(u) + b_l).
// The node's own state is not part of the sum.
NodeVectors sgin_forward(const Graph& g, const SginModel& model);

}  // namespace amp
