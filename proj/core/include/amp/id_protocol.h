#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "amp/engine.h"
#include "amp/graph.h"

namespace amp {

enum class IdRole { kAssigning, kHaving, kTaking, kYielding };
enum class IdMsgType { kOffer, kConfirm, kClaim, kSurrender, kOrigin };

const char* to_string(IdRole role);
const char* to_string(IdMsgType type);

// Field `attempt_try` is the node's current attempt ("try"). For the center,
// w counts replies still expected in the current attempt and x counts outer
// nodes without an ID.
struct IdNodeState {
  int attempt_try = -1;
  int id = 0;
  int c = 0;
  int w = 0;
  int x = 0;
  IdRole role = IdRole::kYielding;

  bool operator==(const IdNodeState&) const = default;
};

struct IdMessage {
  int cid = 0;
  int attempt = 0;
  IdMsgType type = IdMsgType::kOrigin;

  bool operator==(const IdMessage&) const = default;
};

struct IdOutcome {
  IdNodeState state;
  std::optional<IdMessage> emit;
};

// Center rules, first match wins:
//   origin               -> assigning, try 0, w = x = D, emit offer(1, 0)
//   having               -> unchanged
//   attempt != try       -> unchanged (stale reply)
//   claim, c = 0         -> c = 1, w - 1
//   claim, c >= 1        -> conflict: try + 1, c = 0, w = x, emit offer(cid, try + 1)
//   surrender            -> w - 1
// then, once w = 0 with a single claimer: x - 1; x = 0 -> having, emit
// confirm; otherwise try + 1, c = 0, w = x, emit offer(cid + 1, try + 1).
IdOutcome center_transition(const IdNodeState& state, const IdMessage& msg, int D);

// Outer rules. Role-specific rows come before the generic offer row:
//   having                               -> unchanged
//   taking, confirm                      -> having
//   taking, offer newer, cid != id       -> having (the center moved on)
//   taking, claim newer, cid != id       -> having (a rival claims the next ID)
//   taking, claim newer, cid == id       -> yielding, emit surrender
//   offer newer (taking or yielding)     -> taking, id = cid, emit claim
//   yielding, claim newer                -> yielding, emit surrender
// "newer" means attempt > try; try is set to the attempt in every emitting
// row. Surrenders and stale messages leave outer nodes unchanged.
IdOutcome outer_transition(const IdNodeState& state, const IdMessage& msg);

// Per-attempt record kept by the center.
struct AttemptRecord {
  int attempt = 0;
  int cid = 0;
  int contenders = 0;  // outer nodes without an ID when the offer went out
  bool resolved = false;  // true when a single claimer won
};

class IdStarProgram {
 public:
  using State = IdNodeState;
  using Message = IdMessage;

  explicit IdStarProgram(NodeId center) : center_(center) {}

  State initial_state(const Graph& g, NodeId v) const;
  Message initial_message(const Graph& g, NodeId start, int index) const;
  Reaction<State, Message> on_message(const Graph& g, NodeId v, const State& s, const Message& m);

  const std::vector<AttemptRecord>& attempts() const { return attempts_; }
  // Type of each node's first emission, if any.
  const std::vector<std::optional<IdMsgType>>& first_emission() const { return first_emission_; }

 private:
  NodeId center_;
  std::vector<AttemptRecord> attempts_;
  std::vector<std::optional<IdMsgType>> first_emission_;
};

struct StarAssignment {
  std::vector<int> ids;  // ids[0] = 0 for the center
  long long deliveries = 0;
  double virtual_time = 0.0;
  std::vector<AttemptRecord> attempts;
  // Node 1's first reply in attempt 0 was a surrender (k >= 2).
  bool first_reply_surrender = false;
};

inline constexpr long long kIdDeliveryCap = 10'000'000;

// Star with outer clique, uniform [0, 1] delays. Throws ProtocolFailure if
// the protocol does not settle within kIdDeliveryCap deliveries or leaves a
// node without a unique ID.
StarAssignment assign_ids_star(int k, std::uint64_t seed);

// Iterated stars: the start node takes ID 0, then nodes act as centers in
// increasing ID order, handing out IDs above the current maximum to their
// neighbors that have none. Returns a bijection onto 0..n-1.
std::vector<int> assign_ids_general(const Graph& g, std::uint64_t seed, NodeId start = 0);

bool is_bijection(const std::vector<int>& ids);

struct IdReport {
  int k = 0;
  int trials = 0;
  int uniqueness_failures = 0;
  double mean_deliveries = 0.0;
  double mean_virtual_time = 0.0;
  double surrender_prob_estimate = 0.0;
  double mean_attempts = 0.0;
  // Contested attempts per win for one fixed outer node (k = 2 only).
  double fixed_node_attempts_per_win = 0.0;

  nlohmann::ordered_json to_json() const;
};

// Monte Carlo over `trials` seeds derived from `seed`. The surrender estimate
// is the fraction of k = 2 runs in which node 1 surrendered first; it is
// computed from `surrender_trials` extra runs (0 skips it).
IdReport id_monte_carlo(int k, int trials, std::uint64_t seed, int surrender_trials = 0);

nlohmann::ordered_json trace_state(const IdNodeState& s);
nlohmann::ordered_json trace_payload(const IdMessage& m);
nlohmann::ordered_json trace_bits(const IdMessage& m);

}  // namespace amp
