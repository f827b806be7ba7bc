#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace amp {

// Dense row-major matrix of doubles.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}
  static Tensor from(int r, int c, std::vector<double> values);
  static Tensor row(std::vector<double> values);

  std::size_t size() const { return data.size(); }
  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
  bool all_finite() const;

  bool operator==(const Tensor&) const = default;
};

// Named learnable tensors with gradient accumulators and Adam moments.
class ParameterStore {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor m;
    Tensor v;
  };

  int add(const std::string& name, Tensor init);
  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  int index(const std::string& name) const;
  int size() const { return static_cast<int>(entries_.size()); }

  Entry& entry(int i) { return entries_[i]; }
  const Entry& entry(int i) const { return entries_[i]; }
  Tensor& value(const std::string& name) { return entries_[index(name)].value; }
  const Tensor& value(const std::string& name) const { return entries_[index(name)].value; }
  Tensor& grad(const std::string& name) { return entries_[index(name)].grad; }

  void zero_grad();
  double grad_norm() const;
  // Scales all gradients so their global L2 norm is at most max_norm.
  // Returns the norm before clipping.
  double clip_grad_norm(double max_norm);
  long long parameter_count() const;

  long long adam_steps = 0;

  // Versioned checkpoint: {format, version, adam_steps, params: [{name,
  // shape, values}]}. Moments are not saved.
  nlohmann::json to_json() const;
  static ParameterStore from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static ParameterStore load(const std::string& path);

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, int> index_;
};

// Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(int rows, int cols, std::mt19937_64& rng);

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update over every parameter; zeroes gradients.
void adam_step(ParameterStore& store, const AdamConfig& cfg = {});

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape. Every operation appends a record holding its value;
// backward() walks the records once in reverse and accumulates gradients
// into the records and into the bound ParameterStore.
class Tape {
 public:
  explicit Tape(ParameterStore* store = nullptr) : store_(store) {}

  Var constant(Tensor value);
  // Leaf bound to a stored parameter; repeated calls return the same leaf.
  Var param(int index);
  Var param(const std::string& name);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var hadamard(Var a, Var b);
  // Column-wise concatenation of equal-row inputs.
  Var concat(Var a, Var b);
  Var relu(Var a);
  Var sigmoid(Var a);
  Var tanh(Var a);
  // (r x c) -> (r x 1).
  Var row_sum(Var a);
  // Sum of all entries -> 1 x 1.
  Var sum(Var a);
  Var scale(Var a, double k);
  // 1 x 1 scalar times tensor.
  Var scalar_mul(Var s, Var a);
  Var one_minus(Var a);
  // Mean cross-entropy of a 1 x C logit row against `label` -> 1 x 1.
  Var softmax_cross_entropy(Var logits, int label);

  // x W + b for a row vector x.
  Var affine(Var x, Var W, Var b) { return add(matmul(x, W), b); }

  const Tensor& value(Var v) const { return records_[v.id].value; }
  // Gradient of the last backward() root with respect to v.
  const Tensor& grad(Var v) const;

  // Seeds d root = 1 (root must be 1 x 1) and propagates. A tape can be
  // differentiated once; a second call throws ContractViolation.
  void backward(Var root);

  std::size_t size() const { return records_.size(); }

 private:
  enum class Op {
    kLeaf, kMatmul, kAdd, kSub, kHadamard, kConcat, kRelu, kSigmoid, kTanh,
    kRowSum, kSum, kScale, kScalarMul, kOneMinus, kSoftmaxCe,
  };
  struct Record {
    Op op;
    int a = -1;
    int b = -1;
    int param = -1;
    double k = 0.0;
    int label = 0;
    Tensor value;
    Tensor grad;
    Tensor aux;
  };

  Var push(Record r);
  const Tensor& val(Var v) const { return records_.at(v.id).value; }

  ParameterStore* store_;
  std::vector<Record> records_;
  std::unordered_map<int, int> param_leaf_;
  bool backward_done_ = false;
};

// Central finite-difference check of d f / d p for every entry of the given
// parameters; `f` must rebuild the loss on a fresh tape. Returns the largest
// relative error |a-n| / max(1e-6, |a|+|n|) with analytic gradients a
// taken from one backward pass.
struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  int checked = 0;
};

template <typename LossFn>
GradCheckResult gradient_check(ParameterStore& store, LossFn&& f, double h = 1e-5) {
  store.zero_grad();
  {
    Tape tape(&store);
    Var loss = f(tape);
    tape.backward(loss);
  }
  GradCheckResult res;
  for (int i = 0; i < store.size(); ++i) {
    auto& e = store.entry(i);
    for (std::size_t j = 0; j < e.value.size(); ++j) {
      const double orig = e.value.data[j];
      e.value.data[j] = orig + h;
      double up;
      {
        Tape t(&store);
        up = t.value(f(t)).data[0];
      }
      e.value.data[j] = orig - h;
      double down;
      {
        Tape t(&store);
        down = t.value(f(t)).data[0];
      }
      e.value.data[j] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = e.grad.data[j];
      const double abs_err = std::abs(numeric - analytic);
      const double denom = std::max(1e-6, std::abs(numeric) + std::abs(analytic));
      res.max_abs_error = std::max(res.max_abs_error, abs_err);
      res.max_rel_error = std::max(res.max_rel_error, abs_err / denom);
      ++res.checked;
    }
  }
  store.zero_grad();
  return res;
}

}  // namespace amp
