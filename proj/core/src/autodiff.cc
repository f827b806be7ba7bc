#include "amp/autodiff.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "amp/error.h"

namespace amp {

namespace {

std::string shape(const Tensor& t) {
  return std::to_string(t.rows) + "x" + std::to_string(t.cols);
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ContractViolation(std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
  }
}

void accumulate(Tensor& into, const Tensor& g) {
  if (into.size() == 0) {
    into = g;
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) into.data[i] += g.data[i];
}

// C += A * B
void gemm_acc(const Tensor& A, const Tensor& B, Tensor& C) {
  for (int i = 0; i < A.rows; ++i) {
    double* c = C.data.data() + static_cast<std::size_t>(i) * C.cols;
    for (int k = 0; k < A.cols; ++k) {
      const double a = A(i, k);
      if (a == 0.0) continue;
      const double* b = B.data.data() + static_cast<std::size_t>(k) * B.cols;
      for (int j = 0; j < B.cols; ++j) c[j] += a * b[j];
    }
  }
}

}  // namespace

Tensor Tensor::from(int r, int c, std::vector<double> values) {
  if (values.size() != static_cast<std::size_t>(r) * c) {
    throw ContractViolation("tensor data does not match shape " + std::to_string(r) + "x" +
                            std::to_string(c));
  }
  Tensor t;
  t.rows = r;
  t.cols = c;
  t.data = std::move(values);
  return t;
}

Tensor Tensor::row(std::vector<double> values) {
  const int c = static_cast<int>(values.size());
  return from(1, c, std::move(values));
}

bool Tensor::all_finite() const {
  for (double x : data) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

int ParameterStore::add(const std::string& name, Tensor init) {
  if (contains(name)) throw ContractViolation("duplicate parameter " + name);
  const int idx = static_cast<int>(entries_.size());
  Entry e;
  e.name = name;
  e.grad = Tensor(init.rows, init.cols);
  e.m = Tensor(init.rows, init.cols);
  e.v = Tensor(init.rows, init.cols);
  e.value = std::move(init);
  entries_.push_back(std::move(e));
  index_[name] = idx;
  return idx;
}

int ParameterStore::index(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractViolation("unknown parameter " + name);
  return it->second;
}

void ParameterStore::zero_grad() {
  for (auto& e : entries_) std::fill(e.grad.data.begin(), e.grad.data.end(), 0.0);
}

double ParameterStore::grad_norm() const {
  double sq = 0.0;
  for (const auto& e : entries_) {
    for (double g : e.grad.data) sq += g * g;
  }
  return std::sqrt(sq);
}

double ParameterStore::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (norm > max_norm && norm > 0.0) {
    const double k = max_norm / norm;
    for (auto& e : entries_) {
      for (double& g : e.grad.data) g *= k;
    }
  }
  return norm;
}

long long ParameterStore::parameter_count() const {
  long long n = 0;
  for (const auto& e : entries_) n += static_cast<long long>(e.value.size());
  return n;
}

nlohmann::json ParameterStore::to_json() const {
  nlohmann::json j;
  j["format"] = "amp-checkpoint";
  j["version"] = 1;
  j["adam_steps"] = adam_steps;
  j["params"] = nlohmann::json::array();
  for (const auto& e : entries_) {
    j["params"].push_back(
        {{"name", e.name}, {"shape", {e.value.rows, e.value.cols}}, {"values", e.value.data}});
  }
  return j;
}

ParameterStore ParameterStore::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "amp-checkpoint") throw ParseError("<checkpoint>", 0, "not an amp checkpoint");
  if (j.value("version", 0) != 1) throw ParseError("<checkpoint>", 0, "unsupported checkpoint version");
  ParameterStore store;
  store.adam_steps = j.value("adam_steps", 0LL);
  for (const auto& p : j.at("params")) {
    const int r = p.at("shape").at(0).get<int>();
    const int c = p.at("shape").at(1).get<int>();
    store.add(p.at("name").get<std::string>(),
              Tensor::from(r, c, p.at("values").get<std::vector<double>>()));
  }
  return store;
}

void ParameterStore::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write checkpoint " + path);
  out << to_json().dump() << '\n';
}

ParameterStore ParameterStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read checkpoint " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 1, e.what());
  }
  return from_json(j);
}

Tensor glorot_uniform(int rows, int cols, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> dist(-a, a);
  Tensor t(rows, cols);
  for (double& x : t.data) x = dist(rng);
  return t;
}

void adam_step(ParameterStore& store, const AdamConfig& cfg) {
  ++store.adam_steps;
  const double t = static_cast<double>(store.adam_steps);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (int i = 0; i < store.size(); ++i) {
    auto& e = store.entry(i);
    for (std::size_t j = 0; j < e.value.size(); ++j) {
      const double g = e.grad.data[j];
      e.m.data[j] = cfg.beta1 * e.m.data[j] + (1.0 - cfg.beta1) * g;
      e.v.data[j] = cfg.beta2 * e.v.data[j] + (1.0 - cfg.beta2) * g * g;
      const double mhat = e.m.data[j] / c1;
      const double vhat = e.v.data[j] / c2;
      e.value.data[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
  store.zero_grad();
}

Var Tape::push(Record r) {
  records_.push_back(std::move(r));
  return Var{static_cast<int>(records_.size()) - 1};
}

Var Tape::constant(Tensor value) {
  Record r;
  r.op = Op::kLeaf;
  r.value = std::move(value);
  return push(std::move(r));
}

Var Tape::param(int index) {
  if (!store_) throw ContractViolation("tape has no parameter store");
  auto it = param_leaf_.find(index);
  if (it != param_leaf_.end()) return Var{it->second};
  Record r;
  r.op = Op::kLeaf;
  r.param = index;
  r.value = store_->entry(index).value;
  Var v = push(std::move(r));
  param_leaf_[index] = v.id;
  return v;
}

Var Tape::param(const std::string& name) {
  if (!store_) throw ContractViolation("tape has no parameter store");
  return param(store_->index(name));
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& A = val(a);
  const Tensor& B = val(b);
  if (A.cols != B.rows) throw ContractViolation("matmul: shape mismatch " + shape(A) + " * " + shape(B));
  Record r;
  r.op = Op::kMatmul;
  r.a = a.id;
  r.b = b.id;
  r.value = Tensor(A.rows, B.cols);
  gemm_acc(A, B, r.value);
  return push(std::move(r));
}

Var Tape::add(Var a, Var b) {
  require_same(val(a), val(b), "add");
  Record r;
  r.op = Op::kAdd;
  r.a = a.id;
  r.b = b.id;
  r.value = val(a);
  for (std::size_t i = 0; i < r.value.size(); ++i) r.value.data[i] += val(b).data[i];
  return push(std::move(r));
}

Var Tape::sub(Var a, Var b) {
  require_same(val(a), val(b), "sub");
  Record r;
  r.op = Op::kSub;
  r.a = a.id;
  r.b = b.id;
  r.value = val(a);
  for (std::size_t i = 0; i < r.value.size(); ++i) r.value.data[i] -= val(b).data[i];
  return push(std::move(r));
}

Var Tape::hadamard(Var a, Var b) {
  require_same(val(a), val(b), "hadamard");
  Record r;
  r.op = Op::kHadamard;
  r.a = a.id;
  r.b = b.id;
  r.value = val(a);
  for (std::size_t i = 0; i < r.value.size(); ++i) r.value.data[i] *= val(b).data[i];
  return push(std::move(r));
}

Var Tape::concat(Var a, Var b) {
  const Tensor& A = val(a);
  const Tensor& B = val(b);
  if (A.rows != B.rows) throw ContractViolation("concat: row mismatch " + shape(A) + " | " + shape(B));
  Record r;
  r.op = Op::kConcat;
  r.a = a.id;
  r.b = b.id;
  r.value = Tensor(A.rows, A.cols + B.cols);
  for (int i = 0; i < A.rows; ++i) {
    for (int j = 0; j < A.cols; ++j) r.value(i, j) = A(i, j);
    for (int j = 0; j < B.cols; ++j) r.value(i, A.cols + j) = B(i, j);
  }
  return push(std::move(r));
}

Var Tape::relu(Var a) {
  Record r;
  r.op = Op::kRelu;
  r.a = a.id;
  r.value = val(a);
  for (double& x : r.value.data) x = x > 0.0 ? x : 0.0;
  return push(std::move(r));
}

Var Tape::sigmoid(Var a) {
  Record r;
  r.op = Op::kSigmoid;
  r.a = a.id;
  r.value = val(a);
  for (double& x : r.value.data) {
    x = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  return push(std::move(r));
}

Var Tape::tanh(Var a) {
  Record r;
  r.op = Op::kTanh;
  r.a = a.id;
  r.value = val(a);
  for (double& x : r.value.data) x = std::tanh(x);
  return push(std::move(r));
}

Var Tape::row_sum(Var a) {
  const Tensor& A = val(a);
  Record r;
  r.op = Op::kRowSum;
  r.a = a.id;
  r.value = Tensor(A.rows, 1);
  for (int i = 0; i < A.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < A.cols; ++j) s += A(i, j);
    r.value(i, 0) = s;
  }
  return push(std::move(r));
}

Var Tape::sum(Var a) {
  Record r;
  r.op = Op::kSum;
  r.a = a.id;
  double s = 0.0;
  for (double x : val(a).data) s += x;
  r.value = Tensor(1, 1, s);
  return push(std::move(r));
}

Var Tape::scale(Var a, double k) {
  Record r;
  r.op = Op::kScale;
  r.a = a.id;
  r.k = k;
  r.value = val(a);
  for (double& x : r.value.data) x *= k;
  return push(std::move(r));
}

Var Tape::scalar_mul(Var s, Var a) {
  const Tensor& S = val(s);
  if (S.rows != 1 || S.cols != 1) throw ContractViolation("scalar_mul: scalar must be 1x1, got " + shape(S));
  Record r;
  r.op = Op::kScalarMul;
  r.a = s.id;
  r.b = a.id;
  r.value = val(a);
  for (double& x : r.value.data) x *= S.data[0];
  return push(std::move(r));
}

Var Tape::one_minus(Var a) {
  Record r;
  r.op = Op::kOneMinus;
  r.a = a.id;
  r.value = val(a);
  for (double& x : r.value.data) x = 1.0 - x;
  return push(std::move(r));
}

Var Tape::softmax_cross_entropy(Var logits, int label) {
  const Tensor& L = val(logits);
  if (L.rows != 1) throw ContractViolation("softmax_cross_entropy expects one row, got " + shape(L));
  if (label < 0 || label >= L.cols) throw ContractViolation("label out of range");
  double mx = L.data[0];
  for (double x : L.data) mx = std::max(mx, x);
  Tensor p(1, L.cols);
  double z = 0.0;
  for (int j = 0; j < L.cols; ++j) {
    p.data[j] = std::exp(L.data[j] - mx);
    z += p.data[j];
  }
  for (double& x : p.data) x /= z;
  Record r;
  r.op = Op::kSoftmaxCe;
  r.a = logits.id;
  r.label = label;
  r.value = Tensor(1, 1, -(L.data[label] - mx - std::log(z)));
  r.aux = std::move(p);
  return push(std::move(r));
}

const Tensor& Tape::grad(Var v) const {
  static const Tensor kEmpty;
  const auto& g = records_.at(v.id).grad;
  return g.size() ? g : kEmpty;
}

void Tape::backward(Var root) {
  if (backward_done_) throw ContractViolation("backward already ran on this tape");
  backward_done_ = true;
  const Tensor& rv = val(root);
  if (rv.rows != 1 || rv.cols != 1) throw ContractViolation("backward root must be 1x1");
  records_[root.id].grad = Tensor(1, 1, 1.0);
  for (int id = root.id; id >= 0; --id) {
    Record& r = records_[id];
    if (r.grad.size() == 0) continue;
    const Tensor& g = r.grad;
    auto grad_of = [&](int input) -> Tensor& {
      Tensor& t = records_[input].grad;
      if (t.size() == 0) t = Tensor(records_[input].value.rows, records_[input].value.cols);
      return t;
    };
    switch (r.op) {
      case Op::kLeaf:
        if (r.param >= 0) accumulate(store_->entry(r.param).grad, g);
        break;
      case Op::kMatmul: {
        const Tensor& A = records_[r.a].value;
        const Tensor& B = records_[r.b].value;
        Tensor& dA = grad_of(r.a);
        for (int i = 0; i < A.rows; ++i) {
          for (int k = 0; k < A.cols; ++k) {
            double s = 0.0;
            const double* b = B.data.data() + static_cast<std::size_t>(k) * B.cols;
            const double* gi = g.data.data() + static_cast<std::size_t>(i) * g.cols;
            for (int j = 0; j < B.cols; ++j) s += gi[j] * b[j];
            dA(i, k) += s;
          }
        }
        Tensor& dB = grad_of(r.b);
        for (int i = 0; i < A.rows; ++i) {
          const double* gi = g.data.data() + static_cast<std::size_t>(i) * g.cols;
          for (int k = 0; k < A.cols; ++k) {
            const double a = A(i, k);
            if (a == 0.0) continue;
            double* db = dB.data.data() + static_cast<std::size_t>(k) * dB.cols;
            for (int j = 0; j < B.cols; ++j) db[j] += a * gi[j];
          }
        }
        break;
      }
      case Op::kAdd:
        accumulate(grad_of(r.a), g);
        accumulate(grad_of(r.b), g);
        break;
      case Op::kSub: {
        accumulate(grad_of(r.a), g);
        Tensor& dB = grad_of(r.b);
        for (std::size_t i = 0; i < g.size(); ++i) dB.data[i] -= g.data[i];
        break;
      }
      case Op::kHadamard: {
        const Tensor& A = records_[r.a].value;
        const Tensor& B = records_[r.b].value;
        Tensor& dA = grad_of(r.a);
        for (std::size_t i = 0; i < g.size(); ++i) dA.data[i] += g.data[i] * B.data[i];
        Tensor& dB = grad_of(r.b);
        for (std::size_t i = 0; i < g.size(); ++i) dB.data[i] += g.data[i] * A.data[i];
        break;
      }
      case Op::kConcat: {
        Tensor& dA = grad_of(r.a);
        Tensor& dB = grad_of(r.b);
        for (int i = 0; i < g.rows; ++i) {
          for (int j = 0; j < dA.cols; ++j) dA(i, j) += g(i, j);
          for (int j = 0; j < dB.cols; ++j) dB(i, j) += g(i, dA.cols + j);
        }
        break;
      }
      case Op::kRelu: {
        const Tensor& A = records_[r.a].value;
        Tensor& dA = grad_of(r.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (A.data[i] > 0.0) dA.data[i] += g.data[i];
        }
        break;
      }
      case Op::kSigmoid: {
        Tensor& dA = grad_of(r.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double y = r.value.data[i];
          dA.data[i] += g.data[i] * y * (1.0 - y);
        }
        break;
      }
      case Op::kTanh: {
        Tensor& dA = grad_of(r.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double y = r.value.data[i];
          dA.data[i] += g.data[i] * (1.0 - y * y);
        }
        break;
      }
      case Op::kRowSum: {
        Tensor& dA = grad_of(r.a);
        for (int i = 0; i < dA.rows; ++i) {
          for (int j = 0; j < dA.cols; ++j) dA(i, j) += g(i, 0);
        }
        break;
      }
      case Op::kSum: {
        Tensor& dA = grad_of(r.a);
        for (double& x : dA.data) x += g.data[0];
        break;
      }
      case Op::kScale: {
        Tensor& dA = grad_of(r.a);
        for (std::size_t i = 0; i < g.size(); ++i) dA.data[i] += r.k * g.data[i];
        break;
      }
      case Op::kScalarMul: {
        const double s = records_[r.a].value.data[0];
        const Tensor& X = records_[r.b].value;
        double ds = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) ds += g.data[i] * X.data[i];
        grad_of(r.a).data[0] += ds;
        Tensor& dX = grad_of(r.b);
        for (std::size_t i = 0; i < g.size(); ++i) dX.data[i] += s * g.data[i];
        break;
      }
      case Op::kOneMinus: {
        Tensor& dA = grad_of(r.a);
        for (std::size_t i = 0; i < g.size(); ++i) dA.data[i] -= g.data[i];
        break;
      }
      case Op::kSoftmaxCe: {
        Tensor& dA = grad_of(r.a);
        for (int j = 0; j < dA.cols; ++j) {
          dA.data[j] += g.data[0] * (r.aux.data[j] - (j == r.label ? 1.0 : 0.0));
        }
        break;
      }
    }
  }
}

}  // namespace amp
