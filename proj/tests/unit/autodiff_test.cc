#include <cmath>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "amp/autodiff.h"
#include "amp/cells.h"
#include "amp/error.h"

namespace amp {
namespace {

Tensor random_tensor(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Tensor t(r, c);
  for (double& x : t.data) x = u(rng);
  return t;
}

// Loss = sum(op(inputs) * C) for a fixed random projection C, so every
// output entry contributes with a distinct weight.
using UnaryOp = std::function<Var(Tape&, Var)>;
using BinaryOp = std::function<Var(Tape&, Var, Var)>;

double check_unary(const UnaryOp& op, int r, int c, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  ParameterStore store;
  store.add("a", random_tensor(r, c, rng, scale));
  Tensor proj;
  {
    Tape probe(&store);
    proj = random_tensor(probe.value(op(probe, probe.param("a"))).rows,
                         probe.value(op(probe, probe.param("a"))).cols, rng);
  }
  auto res = gradient_check(store, [&](Tape& t) {
    return t.sum(t.hadamard(op(t, t.param("a")), t.constant(proj)));
  });
  EXPECT_EQ(res.checked, r * c);
  return res.max_rel_error;
}

double check_binary(const BinaryOp& op, int ra, int ca, int rb, int cb, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ParameterStore store;
  store.add("a", random_tensor(ra, ca, rng));
  store.add("b", random_tensor(rb, cb, rng));
  Tensor proj;
  {
    Tape probe(&store);
    const Tensor& v = probe.value(op(probe, probe.param("a"), probe.param("b")));
    proj = random_tensor(v.rows, v.cols, rng);
  }
  auto res = gradient_check(store, [&](Tape& t) {
    return t.sum(t.hadamard(op(t, t.param("a"), t.param("b")), t.constant(proj)));
  });
  return res.max_rel_error;
}

TEST(Tensor, Basics) {
  Tensor t = Tensor::from(2, 2, {1, 2, 3, 4});
  EXPECT_EQ(t(1, 0), 3);
  EXPECT_TRUE(t.all_finite());
  t(0, 1) = NAN;
  EXPECT_FALSE(t.all_finite());
  EXPECT_THROW(Tensor::from(2, 2, {1, 2, 3}), ContractViolation);
}

TEST(Primitives, ReluForwardAndMask) {
  Tape t;
  Var x = t.constant(Tensor::row({-1.0, 2.0}));
  Var y = t.relu(x);
  EXPECT_EQ(t.value(y).data, (std::vector<double>{0.0, 2.0}));
  t.backward(t.sum(y));
  EXPECT_EQ(t.grad(x).data, (std::vector<double>{0.0, 1.0}));
}

TEST(Primitives, CrossEntropyOfUniformLogits) {
  Tape t;
  Var l = t.softmax_cross_entropy(t.constant(Tensor::row({0.3, 0.3})), 1);
  EXPECT_NEAR(t.value(l).data[0], std::log(2.0), 1e-15);
  EXPECT_THROW(t.softmax_cross_entropy(t.constant(Tensor::row({0.3, 0.3})), 2), ContractViolation);
}

TEST(Primitives, ShapeMismatchesThrow) {
  Tape t;
  Var a = t.constant(Tensor(2, 3));
  Var b = t.constant(Tensor(2, 2));
  EXPECT_THROW(t.matmul(a, b), ContractViolation);
  EXPECT_THROW(t.add(a, b), ContractViolation);
  EXPECT_THROW(t.hadamard(a, b), ContractViolation);
  EXPECT_THROW(t.concat(a, t.constant(Tensor(3, 1))), ContractViolation);
  EXPECT_THROW(t.scalar_mul(a, b), ContractViolation);
  EXPECT_THROW(t.backward(a), ContractViolation);
}

TEST(Primitives, BackwardOnlyOnce) {
  Tape t;
  Var x = t.constant(Tensor::row({1.0}));
  Var y = t.sum(x);
  t.backward(y);
  EXPECT_THROW(t.backward(y), ContractViolation);
}

TEST(Primitives, ParamLeafIsShared) {
  ParameterStore store;
  store.add("w", Tensor::row({2.0}));
  Tape t(&store);
  Var a = t.param("w");
  Var b = t.param("w");
  EXPECT_EQ(a.id, b.id);
  t.backward(t.sum(t.hadamard(a, b)));
  EXPECT_EQ(store.grad("w").data[0], 4.0);
}

TEST(GradCheck, MatmulChain) {
  std::mt19937_64 rng(3);
  ParameterStore store;
  store.add("a", random_tensor(3, 3, rng));
  store.add("b", random_tensor(3, 3, rng));
  store.add("c", random_tensor(3, 3, rng));
  auto res = gradient_check(store, [](Tape& t) {
    return t.sum(t.tanh(t.matmul(t.matmul(t.param("a"), t.param("b")), t.param("c"))));
  });
  EXPECT_EQ(res.checked, 27);
  EXPECT_LT(res.max_rel_error, 1e-4);
}

class RandomShapes : public ::testing::TestWithParam<int> {};

TEST_P(RandomShapes, EveryPrimitive) {
  const int seed = GetParam();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim(1, 16);
  const int r = dim(rng), c = dim(rng), k = dim(rng);
  EXPECT_LT(check_binary([](Tape& t, Var a, Var b) { return t.matmul(a, b); }, r, k, k, c, seed), 1e-4);
  EXPECT_LT(check_binary([](Tape& t, Var a, Var b) { return t.add(a, b); }, r, c, r, c, seed), 1e-4);
  EXPECT_LT(check_binary([](Tape& t, Var a, Var b) { return t.sub(a, b); }, r, c, r, c, seed), 1e-4);
  EXPECT_LT(check_binary([](Tape& t, Var a, Var b) { return t.hadamard(a, b); }, r, c, r, c, seed), 1e-4);
  EXPECT_LT(check_binary([](Tape& t, Var a, Var b) { return t.concat(a, b); }, r, c, r, k, seed), 1e-4);
  EXPECT_LT(check_binary([](Tape& t, Var a, Var b) { return t.scalar_mul(a, b); }, 1, 1, r, c, seed), 1e-4);
  EXPECT_LT(check_unary([](Tape& t, Var a) { return t.relu(a); }, r, c, seed), 1e-4);
  EXPECT_LT(check_unary([](Tape& t, Var a) { return t.sigmoid(a); }, r, c, seed, 3.0), 1e-4);
  EXPECT_LT(check_unary([](Tape& t, Var a) { return t.tanh(a); }, r, c, seed, 2.0), 1e-4);
  EXPECT_LT(check_unary([](Tape& t, Var a) { return t.row_sum(a); }, r, c, seed), 1e-4);
  EXPECT_LT(check_unary([](Tape& t, Var a) { return t.scale(a, -1.7); }, r, c, seed), 1e-4);
  EXPECT_LT(check_unary([](Tape& t, Var a) { return t.one_minus(a); }, r, c, seed), 1e-4);
  EXPECT_LT(check_unary([&](Tape& t, Var a) { return t.softmax_cross_entropy(a, seed % c); }, 1, c, seed, 3.0),
            1e-4);
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomShapes, ::testing::Range(1, 9));

TEST(Cells, ZeroParamGru) {
  ParameterStore store;
  std::mt19937_64 rng(0);
  add_cell_params(store, "c", CellKind::kGru, 1, 1, rng);
  for (int i = 0; i < store.size(); ++i) store.entry(i).value = Tensor(store.entry(i).value.rows, store.entry(i).value.cols);
  Tape t(&store);
  Var h = gru_cell(t, "c", t.constant(Tensor::row({1.0})), t.constant(Tensor::row({0.7})));
  EXPECT_DOUBLE_EQ(t.value(h).data[0], 0.5);
}

TEST(Cells, ZeroParamLstm) {
  ParameterStore store;
  std::mt19937_64 rng(0);
  add_cell_params(store, "c", CellKind::kLstm, 1, 1, rng);
  for (int i = 0; i < store.size(); ++i) store.entry(i).value = Tensor(store.entry(i).value.rows, store.entry(i).value.cols);
  Tape t(&store);
  auto out = lstm_cell(t, "c", t.constant(Tensor::row({1.0})), t.constant(Tensor::row({0.0})),
                       t.constant(Tensor::row({0.7})));
  EXPECT_DOUBLE_EQ(t.value(out.c).data[0], 0.0);
  EXPECT_DOUBLE_EQ(t.value(out.h).data[0], 0.0);
}

TEST(Cells, GradientChecks) {
  for (auto kind : {CellKind::kRnn, CellKind::kGru, CellKind::kLstm}) {
    std::mt19937_64 rng(11);
    ParameterStore store;
    add_cell_params(store, "c", kind, 3, 4, rng);
    for (int i = 0; i < store.size(); ++i) {
      if (store.entry(i).name.find(".b") != std::string::npos) store.entry(i).value = random_tensor(1, 4, rng);
    }
    store.add("h0", random_tensor(1, 4, rng));
    store.add("c0", random_tensor(1, 4, rng));
    store.add("x", random_tensor(1, 3, rng));
    const Tensor proj = random_tensor(1, 4, rng);
    auto res = gradient_check(store, [&](Tape& t) {
      Var h = t.param("h0");
      Var c = t.param("c0");
      // Two steps so the recurrence itself is differentiated.
      for (int step = 0; step < 2; ++step) {
        if (kind == CellKind::kRnn) h = rnn_cell(t, "c", h, t.param("x"));
        if (kind == CellKind::kGru) h = gru_cell(t, "c", h, t.param("x"));
        if (kind == CellKind::kLstm) {
          auto o = lstm_cell(t, "c", h, c, t.param("x"));
          h = o.h;
          c = o.c;
        }
      }
      return t.sum(t.hadamard(h, t.constant(proj)));
    });
    EXPECT_LT(res.max_rel_error, 1e-4) << to_string(kind);
  }
}

TEST(Cells, KindNames) {
  EXPECT_EQ(cell_kind_from_string("gru"), CellKind::kGru);
  EXPECT_STREQ(to_string(CellKind::kLstm), "lstm");
  EXPECT_THROW(cell_kind_from_string("transformer"), InvalidArgument);
}

TEST(Adam, ZeroGradientKeepsParameters) {
  ParameterStore store;
  store.add("w", Tensor::row({1.0, -2.0}));
  adam_step(store);
  EXPECT_EQ(store.value("w").data, (std::vector<double>{1.0, -2.0}));
}

TEST(Adam, ConstantGradientStepsByLearningRate) {
  ParameterStore store;
  store.add("w", Tensor::row({0.0, 0.0}));
  for (int i = 0; i < 50; ++i) {
    store.grad("w").data = {3.0, -0.2};
    const auto before = store.value("w").data;
    adam_step(store, {0.01});
    EXPECT_NEAR(store.value("w").data[0] - before[0], -0.01, 1e-6);
    EXPECT_NEAR(store.value("w").data[1] - before[1], 0.01, 1e-6);
    EXPECT_EQ(store.grad("w").data, (std::vector<double>{0.0, 0.0}));
  }
}

TEST(Adam, QuadraticConverges) {
  ParameterStore store;
  store.add("w", Tensor::row({1.0}));
  int steps = 0;
  double loss = 1.0;
  for (; steps < 2000 && loss >= 1e-6; ++steps) {
    Tape t(&store);
    Var w = t.param("w");
    Var l = t.sum(t.hadamard(t.sub(w, t.constant(Tensor::row({0.3}))), t.sub(w, t.constant(Tensor::row({0.3})))));
    loss = t.value(l).data[0];
    if (loss < 1e-6) break;
    t.backward(l);
    adam_step(store, {0.01});
  }
  EXPECT_LT(loss, 1e-6);
  EXPECT_LE(steps, 2000);
}

TEST(ParameterStore, ClipAndCheckpoint) {
  ParameterStore store;
  store.add("a", Tensor::row({1.0, 2.0}));
  store.add("b", Tensor::from(2, 1, {3.0, 4.0}));
  EXPECT_THROW(store.add("a", Tensor::row({0.0})), ContractViolation);
  store.grad("a").data = {3.0, 0.0};
  store.grad("b").data = {0.0, 4.0};
  EXPECT_DOUBLE_EQ(store.grad_norm(), 5.0);
  EXPECT_DOUBLE_EQ(store.clip_grad_norm(1.0), 5.0);
  EXPECT_NEAR(store.grad_norm(), 1.0, 1e-15);
  EXPECT_EQ(store.parameter_count(), 4);
  auto back = ParameterStore::from_json(store.to_json());
  ASSERT_EQ(back.size(), 2);
  EXPECT_EQ(back.value("a"), store.value("a"));
  EXPECT_EQ(back.value("b"), store.value("b"));
  auto j = store.to_json();
  j["version"] = 7;
  EXPECT_THROW(ParameterStore::from_json(j), ParseError);
}

TEST(Glorot, RangeAndDeterminism) {
  std::mt19937_64 a(5), b(5);
  Tensor x = glorot_uniform(10, 6, a);
  EXPECT_EQ(x, glorot_uniform(10, 6, b));
  const double lim = std::sqrt(6.0 / 16.0);
  for (double v : x.data) EXPECT_LE(std::abs(v), lim);
}

}  // namespace
}  // namespace amp
