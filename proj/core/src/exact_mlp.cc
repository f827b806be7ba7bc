#include "amp/exact_mlp.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "amp/error.h"
#include "amp/rng.h"

namespace amp {

ReducedOutput reduced_transition(const ReducedInput& in, const SginWeights& weights) {
  const int d = weights.d;
  if (static_cast<int>(in.s.size()) != d || static_cast<int>(in.m.size()) != d) {
    throw ContractViolation("reduced transition width mismatch");
  }
  if (in.safe) return {in.s, ReducedBranch::kKeep};
  std::vector<double> total(d);
  for (int i = 0; i < d; ++i) total[i] = in.s[i] + in.m[i];
  if (in.w == 0) return {weights.apply(total), ReducedBranch::kUpdate};
  return {total, ReducedBranch::kAccumulate};
}

namespace {

DenseLayer make_layer(int in, int out, bool relu) {
  DenseLayer layer;
  layer.in = in;
  layer.out = out;
  layer.W.assign(static_cast<std::size_t>(in) * out, 0.0);
  layer.b.assign(out, 0.0);
  layer.relu = relu;
  return layer;
}

double& at(DenseLayer& layer, int row, int col) {
  return layer.W[static_cast<std::size_t>(row) * layer.in + col];
}

}  // namespace

ExactTransitionMlp::ExactTransitionMlp(int max_degree, const SginWeights& weights, double bound)
    : d_(weights.d), max_degree_(max_degree), bound_(bound) {
  weights.validate();
  if (max_degree < 1) throw InvalidArgument("degree bound must be >= 1");
  if (!(bound > 0.0) || !std::isfinite(bound)) throw InvalidArgument("domain bound must be positive");
  const int d = d_;
  const double max_component = 2.0 * bound;
  const double max_middle = d * weights.max_abs_weight() * 2.0 * bound + weights.max_abs_bias();
  penalty_ = 2.0 * (max_component + max_middle) + 1.0;
  const double P = penalty_;

  // Layer 1 units.
  const int sp = 0, sn = d, mp = 2 * d, mn = 3 * d;
  const int safe = 4 * d, notsafe = safe + 1, zero = safe + 2, wa = safe + 3, wb = safe + 4;
  const int h1 = 4 * d + 5;
  // Input positions.
  const int in_s = 0, in_m = d, in_safe = 2 * d, in_w = 2 * d + 1;
  DenseLayer l1 = make_layer(2 * d + 2, h1, true);
  for (int i = 0; i < d; ++i) {
    at(l1, sp + i, in_s + i) = 1.0;
    at(l1, sn + i, in_s + i) = -1.0;
    at(l1, mp + i, in_m + i) = 1.0;
    at(l1, mn + i, in_m + i) = -1.0;
  }
  at(l1, safe, in_safe) = 1.0;
  at(l1, notsafe, in_safe) = -1.0;
  l1.b[notsafe] = 1.0;
  at(l1, zero, in_w) = -1.0;
  l1.b[zero] = 1.0;
  at(l1, wa, in_w) = 1.0;
  at(l1, wb, in_w) = 1.0;
  l1.b[wb] = -1.0;

  // Layer 2 units: keep (+/-), update, accumulate (+/-), branch indicators.
  const int kp = 0, kn = d, up = 2 * d, ap = 3 * d, an = 4 * d;
  const int ikeep = 5 * d, iupd = ikeep + 1, iacc = ikeep + 2;
  const int h2 = 5 * d + 3;
  DenseLayer l2 = make_layer(h1, h2, true);
  for (int i = 0; i < d; ++i) {
    at(l2, kp + i, sp + i) = 1.0;
    at(l2, kp + i, notsafe) = -P;
    at(l2, kn + i, sn + i) = 1.0;
    at(l2, kn + i, notsafe) = -P;

    for (int k = 0; k < d; ++k) {
      const double w = weights.W[static_cast<std::size_t>(i) * d + k];
      at(l2, up + i, sp + k) = w;
      at(l2, up + i, sn + k) = -w;
      at(l2, up + i, mp + k) = w;
      at(l2, up + i, mn + k) = -w;
    }
    at(l2, up + i, safe) = -P;
    at(l2, up + i, wa) = -P;
    at(l2, up + i, wb) = P;
    l2.b[up + i] = weights.b.empty() ? 0.0 : weights.b[i];

    for (int sign : {1, -1}) {
      const int row = (sign > 0 ? ap : an) + i;
      at(l2, row, sp + i) = sign;
      at(l2, row, sn + i) = -sign;
      at(l2, row, mp + i) = sign;
      at(l2, row, mn + i) = -sign;
      at(l2, row, safe) = -P;
      at(l2, row, zero) = -P;
    }
  }
  at(l2, ikeep, safe) = 1.0;
  at(l2, iupd, notsafe) = 1.0;
  at(l2, iupd, zero) = 1.0;
  l2.b[iupd] = -1.0;
  at(l2, iacc, notsafe) = 1.0;
  at(l2, iacc, wa) = 1.0;
  at(l2, iacc, wb) = -1.0;
  l2.b[iacc] = -1.0;

  DenseLayer l3 = make_layer(h2, d + 3, false);
  for (int i = 0; i < d; ++i) {
    at(l3, i, kp + i) = 1.0;
    at(l3, i, kn + i) = -1.0;
    at(l3, i, up + i) = 1.0;
    at(l3, i, ap + i) = 1.0;
    at(l3, i, an + i) = -1.0;
  }
  at(l3, d, ikeep) = 1.0;
  at(l3, d + 1, iupd) = 1.0;
  at(l3, d + 2, iacc) = 1.0;

  layers_ = {std::move(l1), std::move(l2), std::move(l3)};
}

std::vector<double> ExactTransitionMlp::encode(const ReducedInput& in) const {
  if (static_cast<int>(in.s.size()) != d_ || static_cast<int>(in.m.size()) != d_) {
    throw ContractViolation("exact MLP input width mismatch");
  }
  std::vector<double> x;
  x.reserve(2 * d_ + 2);
  for (const auto* v : {&in.s, &in.m}) {
    for (double e : *v) {
      if (!(std::abs(e) <= bound_)) {
        throw OutOfDomain("entry " + std::to_string(e) + " exceeds bound " + std::to_string(bound_));
      }
      x.push_back(e);
    }
  }
  if (in.w < 0 || in.w > max_degree_) {
    throw OutOfDomain("counter " + std::to_string(in.w) + " outside [0, " +
                      std::to_string(max_degree_) + "]");
  }
  x.push_back(in.safe ? 1.0 : 0.0);
  x.push_back(static_cast<double>(in.w));
  return x;
}

std::vector<double> ExactTransitionMlp::forward(const std::vector<double>& x) const {
  std::vector<double> h = x;
  for (const auto& layer : layers_) {
    if (static_cast<int>(h.size()) != layer.in) throw ContractViolation("layer width mismatch");
    std::vector<double> next(layer.out);
    for (int r = 0; r < layer.out; ++r) {
      double acc = 0.0;
      const double* row = layer.W.data() + static_cast<std::size_t>(r) * layer.in;
      for (int c = 0; c < layer.in; ++c) {
        if (row[c] != 0.0) acc += row[c] * h[c];
      }
      acc += layer.b[r];
      next[r] = layer.relu ? std::max(acc, 0.0) : acc;
    }
    h = std::move(next);
  }
  return h;
}

ReducedOutput ExactTransitionMlp::evaluate(const ReducedInput& in) const {
  auto y = forward(encode(in));
  ReducedOutput out;
  out.h.assign(y.begin(), y.begin() + d_);
  const double keep = y[d_], update = y[d_ + 1], accumulate = y[d_ + 2];
  if (keep + update + accumulate != 1.0 || (keep != 0.0 && keep != 1.0) ||
      (update != 0.0 && update != 1.0)) {
    throw ProtocolViolation("branch indicators are not one-hot");
  }
  out.branch = keep == 1.0 ? ReducedBranch::kKeep
               : update == 1.0 ? ReducedBranch::kUpdate
                               : ReducedBranch::kAccumulate;
  return out;
}

ExactTransitionMlp build_exact_transition_mlp(int D, int d, const SginWeights& weights,
                                              double bound) {
  if (weights.d != d) throw ContractViolation("weight width does not match d");
  return ExactTransitionMlp(D, weights, bound);
}

MlpVerification verify_exact_mlp(int samples, std::uint64_t seed, int max_degree, int d) {
  if (samples < 0 || max_degree < 1 || d < 1) throw InvalidArgument("invalid verification sizes");
  MlpVerification out;
  out.samples = samples;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_d(1, max_degree);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < samples; ++i) {
    const int D = pick_d(rng);
    const SginWeights w = random_sgin_model(d, 1, derive_seed(seed, i), 1.0, true).layers[0];
    const ExactTransitionMlp mlp = build_exact_transition_mlp(D, d, w);
    // Half the samples stay near zero, the rest span the whole domain.
    const double scale = i % 2 ? mlp.bound() : 1.0;
    ReducedInput in;
    in.s.resize(d);
    in.m.resize(d);
    for (int k = 0; k < d; ++k) {
      in.s[k] = scale * unit(rng);
      in.m[k] = scale * unit(rng);
    }
    in.safe = rng() % 2;
    in.w = std::uniform_int_distribution<int>(0, D)(rng);
    const ReducedOutput want = reduced_transition(in, w);
    const ReducedOutput got = mlp.evaluate(in);
    if (got.branch != want.branch) ++out.branch_mismatches;
    for (int k = 0; k < d; ++k) {
      out.max_abs_error = std::max(out.max_abs_error, std::abs(got.h[k] - want.h[k]));
    }
  }
  return out;
}

}  // namespace amp
