#include <gtest/gtest.h>

#include "amp/error.h"
#include "amp/generators.h"
#include "amp/id_protocol.h"
#include "amp/rng.h"

namespace amp {
namespace {

using R = IdRole;
using T = IdMsgType;

TEST(CenterTransition, OriginOffersFirstId) {
  auto out = center_transition({}, {0, 0, T::kOrigin}, 4);
  EXPECT_EQ(out.state, (IdNodeState{0, 0, 0, 4, 4, R::kAssigning}));
  ASSERT_TRUE(out.emit);
  EXPECT_EQ(*out.emit, (IdMessage{1, 0, T::kOffer}));
}

TEST(CenterTransition, StaleAttemptDropped) {
  IdNodeState s{2, 0, 0, 3, 3, R::kAssigning};
  auto out = center_transition(s, {1, 1, T::kClaim}, 3);
  EXPECT_EQ(out.state, s);
  EXPECT_FALSE(out.emit);
}

TEST(CenterTransition, SingleClaimerWinsThenConfirm) {
  IdNodeState s{0, 0, 0, 2, 2, R::kAssigning};
  auto a = center_transition(s, {1, 0, T::kClaim}, 2);
  EXPECT_EQ(a.state, (IdNodeState{0, 0, 1, 1, 2, R::kAssigning}));
  EXPECT_FALSE(a.emit);
  auto b = center_transition(a.state, {1, 0, T::kSurrender}, 2);
  EXPECT_EQ(b.state, (IdNodeState{1, 0, 0, 1, 1, R::kAssigning}));
  EXPECT_EQ(*b.emit, (IdMessage{2, 1, T::kOffer}));
  auto c = center_transition(b.state, {2, 1, T::kClaim}, 2);
  EXPECT_EQ(c.state.role, R::kHaving);
  EXPECT_EQ(*c.emit, (IdMessage{2, 1, T::kConfirm}));
  auto d = center_transition(c.state, {2, 1, T::kClaim}, 2);
  EXPECT_EQ(d.state, c.state);
  EXPECT_FALSE(d.emit);
}

TEST(CenterTransition, SecondClaimForcesReoffer) {
  IdNodeState s{0, 0, 1, 1, 2, R::kAssigning};
  auto out = center_transition(s, {1, 0, T::kClaim}, 2);
  EXPECT_EQ(out.state, (IdNodeState{1, 0, 0, 2, 2, R::kAssigning}));
  EXPECT_EQ(*out.emit, (IdMessage{1, 1, T::kOffer}));
}

TEST(CenterTransition, Violations) {
  IdNodeState s{0, 0, 0, 2, 2, R::kAssigning};
  EXPECT_THROW(center_transition(s, {0, 0, T::kOrigin}, 2), ProtocolViolation);
  EXPECT_THROW(center_transition(s, {1, 0, T::kOffer}, 2), ProtocolViolation);
  IdNodeState lone{0, 0, 0, 1, 1, R::kAssigning};
  EXPECT_THROW(center_transition(lone, {1, 0, T::kSurrender}, 1), ProtocolViolation);
}

TEST(OuterTransition, TableRows) {
  IdNodeState y{};
  auto claim = outer_transition(y, {1, 0, T::kOffer});
  EXPECT_EQ(claim.state, (IdNodeState{0, 1, 0, 0, 0, R::kTaking}));
  EXPECT_EQ(*claim.emit, (IdMessage{1, 0, T::kClaim}));

  auto confirmed = outer_transition(claim.state, {1, 0, T::kConfirm});
  EXPECT_EQ(confirmed.state.role, R::kHaving);
  EXPECT_EQ(confirmed.state.id, 1);
  EXPECT_FALSE(confirmed.emit);

  auto implicit = outer_transition(claim.state, {2, 1, T::kOffer});
  EXPECT_EQ(implicit.state.role, R::kHaving);
  EXPECT_EQ(implicit.state.id, 1);
  EXPECT_FALSE(implicit.emit);

  auto rival_next = outer_transition(claim.state, {2, 1, T::kClaim});
  EXPECT_EQ(rival_next.state.role, R::kHaving);

  auto rival_same = outer_transition(claim.state, {1, 1, T::kClaim});
  EXPECT_EQ(rival_same.state.role, R::kYielding);
  EXPECT_EQ(*rival_same.emit, (IdMessage{1, 1, T::kSurrender}));

  auto reoffer = outer_transition(claim.state, {1, 1, T::kOffer});
  EXPECT_EQ(reoffer.state.role, R::kTaking);
  EXPECT_EQ(*reoffer.emit, (IdMessage{1, 1, T::kClaim}));

  auto yield = outer_transition(y, {1, 0, T::kClaim});
  EXPECT_EQ(yield.state.role, R::kYielding);
  EXPECT_EQ(yield.state.attempt_try, 0);
  EXPECT_EQ(*yield.emit, (IdMessage{1, 0, T::kSurrender}));

  auto stale = outer_transition(yield.state, {1, 0, T::kOffer});
  EXPECT_EQ(stale.state, yield.state);
  EXPECT_FALSE(stale.emit);

  IdNodeState having{0, 3, 0, 0, 0, R::kHaving};
  EXPECT_EQ(outer_transition(having, {4, 9, T::kOffer}).state, having);
  EXPECT_THROW(outer_transition(y, {0, 0, T::kOrigin}), ProtocolViolation);
}

TEST(AssignIdsStar, SingleOuterNode) {
  auto r = assign_ids_star(1, 5);
  EXPECT_EQ(r.ids, (std::vector<int>{0, 1}));
  ASSERT_EQ(r.attempts.size(), 1u);
  EXPECT_TRUE(r.attempts[0].resolved);
  // origin, offer, claim, confirm
  EXPECT_EQ(r.deliveries, 4);
}

TEST(AssignIdsStar, BijectionsAndDeterminism) {
  for (int k = 1; k <= 6; ++k) {
    for (std::uint64_t s = 0; s < 50; ++s) {
      auto r = assign_ids_star(k, derive_seed(s, k));
      EXPECT_TRUE(is_bijection(r.ids));
      EXPECT_EQ(r.ids[0], 0);
    }
  }
  auto a = assign_ids_star(4, 99);
  auto b = assign_ids_star(4, 99);
  EXPECT_EQ(a.ids, b.ids);
  EXPECT_EQ(a.deliveries, b.deliveries);
  EXPECT_EQ(a.virtual_time, b.virtual_time);
}

TEST(AssignIdsStar, AttemptRecordsAreConsistent) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    auto r = assign_ids_star(3, s);
    int resolved = 0;
    for (const auto& a : r.attempts) resolved += a.resolved;
    EXPECT_EQ(resolved, 3);
    EXPECT_EQ(r.attempts.front().contenders, 3);
    EXPECT_EQ(r.attempts.back().contenders, 1);
  }
}

TEST(AssignIdsGeneral, Bijections) {
  Graph edge = path_graph(2);
  auto ids = assign_ids_general(edge, 1);
  EXPECT_TRUE(is_bijection(ids));
  EXPECT_EQ(ids[0], 0);
  auto star = assign_ids_general(star_graph(3), 4);
  EXPECT_TRUE(is_bijection(star));
  EXPECT_EQ(star[0], 0);
  for (std::uint64_t s = 0; s < 20; ++s) {
    Graph g = generate_spanning_tree_graph(2 + static_cast<int>(s % 9), s);
    EXPECT_TRUE(is_bijection(assign_ids_general(g, s)));
    EXPECT_TRUE(is_bijection(assign_ids_general(g, s, g.num_nodes() - 1)));
  }
  Graph split = Graph::from_edges(3, std::vector<std::pair<NodeId, NodeId>>{{0, 1}});
  EXPECT_THROW(assign_ids_general(split, 0), InvalidArgument);
}

TEST(IsBijection, Cases) {
  EXPECT_TRUE(is_bijection({2, 0, 1}));
  EXPECT_FALSE(is_bijection({0, 0, 1}));
  EXPECT_FALSE(is_bijection({0, 3, 1}));
}

TEST(IdMonteCarlo, ReportFields) {
  auto r = id_monte_carlo(3, 200, 7);
  EXPECT_EQ(r.trials, 200);
  EXPECT_EQ(r.uniqueness_failures, 0);
  EXPECT_GT(r.mean_deliveries, 0.0);
  auto j = r.to_json();
  for (const char* key : {"k", "trials", "uniqueness_failures", "mean_deliveries",
                          "mean_virtual_time", "surrender_prob_estimate"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(IdMonteCarlo, SurrenderProbabilityNearOneSixth) {
  auto r = id_monte_carlo(2, 100, 3, 20000);
  EXPECT_NEAR(r.surrender_prob_estimate, 1.0 / 6.0, 0.02);
}

}  // namespace
}  // namespace amp
