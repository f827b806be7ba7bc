#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "amp/engine.h"
#include "amp/graph.h"
#include "amp/sgin.h"

namespace amp {

// How the origin treats its own features in the first round. kCorrected
// clears them so every node sums only its neighbors; kVerbatim keeps the
// table's behavior, where the origin's features stay in its first sum.
enum class OriginMode { kCorrected, kVerbatim };

struct SyncState {
  std::vector<double> s;
  int w = 0;
  int u = 0;
  int l = 0;

  bool operator==(const SyncState&) const = default;
};

struct SyncMessage {
  std::vector<double> m;
  bool pulse = false;
  bool safe = false;
  bool origin = false;

  static SyncMessage make_pulse(std::vector<double> m) { return {std::move(m), true, false, false}; }
  static SyncMessage make_safe(std::vector<double> m) { return {std::move(m), false, true, false}; }
  static SyncMessage make_origin(std::vector<double> m) { return {std::move(m), false, false, true}; }

  bool operator==(const SyncMessage&) const = default;
};

enum class SyncRow { kHalted, kOrigin, kUnsafeZero, kSafe, kWaitZero, kPulse };

struct SyncOutcome {
  SyncState state;
  std::optional<SyncMessage> emit;
  SyncRow row;
};

// The pulse/safe transition table, rows evaluated top-down:
//   l=0      -> unchanged, silent
//   origin   -> (s, D-1, D, l), emit pulse
//   u=0      -> (m, D-2, D, l), emit pulse
//   safe     -> (s, w, u-1, l)
//   w=0      -> (ReLU(W(s+m)+b), 0, u-1, l-1), emit safe
//   pulse    -> (s+m, w-1, u, l)
// Emitted messages carry the pre-transition s. For D=1 the u=0 row is also
// the round's last message: it applies the layer at once and emits the pulse.
SyncOutcome sync_transition(const SyncState& state, const SyncMessage& msg, int D,
                            const SginWeights& weights,
                            OriginMode mode = OriginMode::kCorrected);

// Wraps sync_transition for the engine. Only sound for L <= 1 (later rounds
// confuse safe messages with the u=0 row); simulate_sgin uses
// SyncSimulationProgram instead.
class TableSyncProgram {
 public:
  using State = SyncState;
  using Message = SyncMessage;

  TableSyncProgram(const SginWeights& weights, int layers, OriginMode mode)
      : weights_(weights), layers_(layers), mode_(mode) {}

  State initial_state(const Graph& g, NodeId v) const;
  Message initial_message(const Graph& g, NodeId start, int index) const;
  Reaction<State, Message> on_message(const Graph& g, NodeId v, const State& s,
                                      const Message& m) const;

 private:
  SginWeights weights_;
  int layers_;
  OriginMode mode_;
};

// Per-node state of the multi-round synchronizer. One round is: emit the
// current value as a pulse, absorb exactly D neighbor pulses, apply the layer,
// announce safety, and start the next round once every neighbor is safe too.
struct SimState {
  std::vector<double> value;  // h^round
  std::vector<double> acc;    // sum of this round's neighbor pulses
  std::vector<double> early;  // next-round pulses received while waiting for safes
  int w = 0;                  // pulses still awaited this round
  int u = 0;                  // unsafe count: neighbors plus self
  int l = 0;                  // layers left
  int early_count = 0;
  int round = 0;
  int absorbed = 0;           // pulses summed into acc this round
  bool started = false;
  bool computed = false;      // value already holds h^(round+1)

  bool done() const { return started && l == 0; }
};

// A pulse carries h^r; a safe announces the sender applied its layer for the
// current round. Both bits may be set at once: a node that becomes safe and
// can immediately start its next round folds both announcements into one
// broadcast. Receivers tell rounds apart by their own phase.
struct SimMessage {
  std::vector<double> m;
  bool pulse = false;
  bool safe = false;
  bool origin = false;
};

class SyncSimulationProgram {
 public:
  using State = SimState;
  using Message = SimMessage;

  SyncSimulationProgram(const SginModel& model, OriginMode mode = OriginMode::kCorrected);

  State initial_state(const Graph& g, NodeId v) const;
  Message initial_message(const Graph& g, NodeId start, int index) const;
  Reaction<State, Message> on_message(const Graph& g, NodeId v, const State& s,
                                      const Message& m) const;
  bool message_ok(const Message& m) const { return static_cast<int>(m.m.size()) == model_.d; }
  bool is_finite(const State& s) const;

 private:
  // Applies the current layer to acc and marks the node safe for the round.
  void compute(State& s, int degree) const;

  SginModel model_;
  OriginMode mode_;
};

struct SimulationResult {
  NodeVectors outputs;
  long long deliveries = 0;
  double virtual_time = 0.0;
  // Nodes never reached by the run keep their input features.
  std::vector<bool> reached;
};

// Runs the synchronizer until quiescence and returns h^L per node. Throws
// ProtocolFailure when more than 20*L*|E| + 1 deliveries are needed or a
// reached node did not finish.
SimulationResult simulate_sgin(const Graph& g, const SginModel& model, NodeId start,
                               const DelayModel& delay, OriginMode mode = OriginMode::kCorrected,
                               bool record_trace = false,
                               Trace<SimState, SimMessage>* trace_out = nullptr);

struct SimVerification {
  int graphs = 0;
  int runs = 0;
  double max_deviation = 0.0;
  // Runs whose start component was not fully reached or that failed.
  int failures = 0;
};

// Equivalence suite: `graphs` random connected graphs with 2..max_n nodes,
// degree <= max_degree and width-d features, each simulated for every
// L in 1..layers with a random model and start. Deviation is the largest
// absolute difference to sgin_forward over all nodes.
SimVerification verify_simulation(int graphs, int max_n, int layers, std::uint64_t seed,
                                  const DelayModel& delay, int max_degree = 5, int d = 3);

nlohmann::ordered_json trace_state(const SyncState& s);
nlohmann::ordered_json trace_payload(const SyncMessage& m);
nlohmann::ordered_json trace_bits(const SyncMessage& m);
nlohmann::ordered_json trace_state(const SimState& s);
nlohmann::ordered_json trace_payload(const SimMessage& m);
nlohmann::ordered_json trace_bits(const SimMessage& m);

}  // namespace amp
