#include "amp/sgin.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "amp/error.h"

namespace amp {

SginWeights SginWeights::identity(int d) {
  SginWeights w;
  w.d = d;
  w.W.assign(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) w.W[static_cast<std::size_t>(i) * d + i] = 1.0;
  return w;
}

void SginWeights::validate() const {
  if (d < 1) throw ContractViolation("sGIN width must be positive");
  if (W.size() != static_cast<std::size_t>(d) * d) throw ContractViolation("sGIN matrix must be d x d");
  if (!b.empty() && b.size() != static_cast<std::size_t>(d)) {
    throw ContractViolation("sGIN bias must have width d");
  }
  for (double x : W) {
    if (!std::isfinite(x)) throw ContractViolation("non-finite sGIN weight");
  }
  for (double x : b) {
    if (!std::isfinite(x)) throw ContractViolation("non-finite sGIN bias");
  }
}

std::vector<double> SginWeights::apply(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(d)) throw ContractViolation("sGIN input width mismatch");
  std::vector<double> out(d);
  for (int i = 0; i < d; ++i) {
    double acc = 0.0;
    for (int k = 0; k < d; ++k) acc += W[static_cast<std::size_t>(i) * d + k] * x[k];
    if (!b.empty()) acc += b[i];
    out[i] = std::max(acc, 0.0);
  }
  return out;
}

double SginWeights::max_abs_weight() const {
  double m = 0.0;
  for (double x : W) m = std::max(m, std::abs(x));
  return m;
}

double SginWeights::max_abs_bias() const {
  double m = 0.0;
  for (double x : b) m = std::max(m, std::abs(x));
  return m;
}

void SginModel::validate() const {
  for (const auto& layer : layers) {
    layer.validate();
    if (layer.d != d) throw ContractViolation("all sGIN layers must share width d");
  }
}

SginModel random_sgin_model(int d, int layers, std::uint64_t seed, double scale, bool with_bias) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  SginModel model;
  model.d = d;
  for (int l = 0; l < layers; ++l) {
    SginWeights w;
    w.d = d;
    w.W.resize(static_cast<std::size_t>(d) * d);
    for (double& x : w.W) x = dist(rng);
    if (with_bias) {
      w.b.resize(d);
      for (double& x : w.b) x = dist(rng);
    }
    model.layers.push_back(std::move(w));
  }
  return model;
}

NodeVectors feature_vectors(const Graph& g) {
  NodeVectors h(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    auto f = g.features(v);
    h[v].assign(f.begin(), f.end());
  }
  return h;
}

NodeVectors sgin_forward(const Graph& g, const SginModel& model) {
  model.validate();
  if (g.feature_width() != model.d) {
    throw ContractViolation("feature width " + std::to_string(g.feature_width()) +
                            " does not match sGIN width " + std::to_string(model.d));
  }
  NodeVectors h = feature_vectors(g);
  for (const auto& layer : model.layers) {
    NodeVectors next(g.num_nodes());
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      std::vector<double> sum(model.d, 0.0);
      for (NodeId u : g.neighbors(v)) {
        for (int k = 0; k < model.d; ++k) sum[k] += h[u][k];
      }
      next[v] = layer.apply(sum);
    }
    h = std::move(next);
  }
  return h;
}

}  // namespace amp
