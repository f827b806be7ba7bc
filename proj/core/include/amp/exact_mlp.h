#pragma once

#include <vector>

#include "amp/sgin.h"

namespace amp {

// Branch of the reduced transition: keep s, apply the layer, or accumulate.
enum class ReducedBranch { kKeep = 0, kUpdate = 1, kAccumulate = 2 };

struct ReducedInput {
  std::vector<double> s;
  std::vector<double> m;
  bool safe = false;
  // Pulse counter whose zero value selects the layer update (w in the full
  // transition).
  int w = 0;
};

struct ReducedOutput {
  std::vector<double> h;
  ReducedBranch branch;
};

// Direct evaluation:
//   safe       -> s
//   w = 0      -> ReLU(W(s+m) + b)
//   otherwise  -> s + m
ReducedOutput reduced_transition(const ReducedInput& in, const SginWeights& weights);

struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> W;  // row-major out x in
  std::vector<double> b;
  bool relu = true;
};

// Three-layer ReLU network realizing reduced_transition on a bounded domain.
// Input encoding: [s (d), m (d), safe, w]. Output: [h (d), keep, update,
// accumulate].
//
// Layer 1 splits s and m into positive and negative parts and forms the bit
// complement 1-safe plus the counter bits [w=0] = ReLU(1-w) and
// [w>0] = ReLU(w) - ReLU(w-1). Layer 2 holds the three branch components;
// each is pushed below zero by a penalty weight P from the bits that disable
// it. Layer 3 sums the surviving component.
class ExactTransitionMlp {
 public:
  ExactTransitionMlp(int max_degree, const SginWeights& weights, double bound);

  // Throws OutOfDomain when |s|, |m| exceed the bound or w is outside
  // [0, max_degree].
  std::vector<double> encode(const ReducedInput& in) const;
  std::vector<double> forward(const std::vector<double>& x) const;
  ReducedOutput evaluate(const ReducedInput& in) const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  double bound() const { return bound_; }
  double penalty() const { return penalty_; }
  int width() const { return d_; }

 private:
  int d_;
  int max_degree_;
  double bound_;
  double penalty_;
  std::vector<DenseLayer> layers_;
};

ExactTransitionMlp build_exact_transition_mlp(int D, int d, const SginWeights& weights,
                                              double bound = 100.0);

struct MlpVerification {
  int samples = 0;
  int branch_mismatches = 0;
  double max_abs_error = 0.0;
};

// Compares the network with reduced_transition on random in-domain inputs:
// per sample a random D in 1..max_degree, width-d weights with bias, and
// s, m, safe, w drawn over the whole domain.
MlpVerification verify_exact_mlp(int samples, std::uint64_t seed, int max_degree = 5, int d = 3);

}  // namespace amp
