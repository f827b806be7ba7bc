#include <gtest/gtest.h>

#include "amp/error.h"
#include "amp/exact_mlp.h"
#include "amp/sgin.h"

namespace amp {
namespace {

SginWeights weights_2d() {
  SginWeights w = SginWeights::identity(2);
  w.W = {1.0, -2.0, 0.5, 3.0};
  w.b = {0.25, -1.0};
  return w;
}

TEST(ReducedTransition, Branches) {
  const auto w = weights_2d();
  ReducedInput in{{1.0, -1.0}, {2.0, 0.5}, true, 0};
  auto safe = reduced_transition(in, w);
  EXPECT_EQ(safe.branch, ReducedBranch::kKeep);
  EXPECT_EQ(safe.h, in.s);
  in.safe = false;
  auto upd = reduced_transition(in, w);
  EXPECT_EQ(upd.branch, ReducedBranch::kUpdate);
  // s+m = (3, -0.5): W row 0 -> 3 + 1 + 0.25, row 1 -> 1.5 - 1.5 - 1.
  EXPECT_DOUBLE_EQ(upd.h[0], 4.25);
  EXPECT_DOUBLE_EQ(upd.h[1], 0.0);
  in.w = 2;
  auto acc = reduced_transition(in, w);
  EXPECT_EQ(acc.branch, ReducedBranch::kAccumulate);
  EXPECT_EQ(acc.h, (std::vector<double>{3.0, -0.5}));
}

TEST(ExactMlp, Shape) {
  auto mlp = build_exact_transition_mlp(4, 2, weights_2d());
  ASSERT_EQ(mlp.layers().size(), 3u);
  EXPECT_TRUE(mlp.layers()[0].relu);
  EXPECT_TRUE(mlp.layers()[1].relu);
  EXPECT_FALSE(mlp.layers()[2].relu);
  EXPECT_EQ(mlp.layers()[0].in, 2 * 2 + 2);
  EXPECT_EQ(mlp.layers()[2].out, 2 + 3);
  EXPECT_GT(mlp.penalty(), 2 * mlp.bound());
}

TEST(ExactMlp, HandExamples) {
  const auto w = weights_2d();
  auto mlp = build_exact_transition_mlp(3, 2, w);
  ReducedInput keep{{1.0, -1.0}, {2.0, 0.5}, true, 0};
  auto k = mlp.evaluate(keep);
  EXPECT_EQ(k.branch, ReducedBranch::kKeep);
  EXPECT_EQ(k.h, keep.s);
  ReducedInput upd{{1.0, -1.0}, {2.0, 0.5}, false, 0};
  auto u = mlp.evaluate(upd);
  EXPECT_EQ(u.branch, ReducedBranch::kUpdate);
  EXPECT_NEAR(u.h[0], 4.25, 1e-12);
  EXPECT_NEAR(u.h[1], 0.0, 1e-12);
  ReducedInput acc{{1.0, -1.0}, {2.0, 0.5}, false, 3};
  auto a = mlp.evaluate(acc);
  EXPECT_EQ(a.branch, ReducedBranch::kAccumulate);
  EXPECT_NEAR(a.h[0], 3.0, 1e-12);
  EXPECT_NEAR(a.h[1], -0.5, 1e-12);
}

TEST(ExactMlp, DomainEdges) {
  const auto w = weights_2d();
  auto mlp = build_exact_transition_mlp(3, 2, w, 10.0);
  for (int wc = 0; wc <= 3; ++wc) {
    for (bool safe : {false, true}) {
      ReducedInput in{{10.0, -10.0}, {-10.0, 10.0}, safe, wc};
      auto want = reduced_transition(in, w);
      auto got = mlp.evaluate(in);
      EXPECT_EQ(got.branch, want.branch);
      for (int k = 0; k < 2; ++k) EXPECT_NEAR(got.h[k], want.h[k], 1e-12);
    }
  }
  EXPECT_THROW(mlp.evaluate({{10.5, 0.0}, {0.0, 0.0}, false, 0}), OutOfDomain);
  EXPECT_THROW(mlp.evaluate({{0.0, 0.0}, {0.0, -11.0}, false, 0}), OutOfDomain);
  EXPECT_THROW(mlp.evaluate({{0.0, 0.0}, {0.0, 0.0}, false, 4}), OutOfDomain);
  EXPECT_THROW(mlp.evaluate({{0.0, 0.0}, {0.0, 0.0}, false, -1}), OutOfDomain);
}

TEST(ExactMlp, RandomizedEquivalence) {
  auto r = verify_exact_mlp(10000, 17);
  EXPECT_EQ(r.samples, 10000);
  EXPECT_EQ(r.branch_mismatches, 0);
  EXPECT_LE(r.max_abs_error, 1e-12);
}

}  // namespace
}  // namespace amp
