#pragma once

#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "amp/error.h"
#include "amp/graph.h"
#include "amp/rng.h"

namespace amp {

struct DelayModel {
  enum class Kind { kConstant, kUniform };

  Kind kind = Kind::kConstant;
  double value = 1.0;
  double lo = 0.0;
  double hi = 1.0;
  std::uint64_t seed = 0;

  static DelayModel constant(double v) {
    DelayModel d;
    d.kind = Kind::kConstant;
    d.value = v;
    d.validate();
    return d;
  }

  static DelayModel uniform(double lo, double hi, std::uint64_t seed) {
    DelayModel d;
    d.kind = Kind::kUniform;
    d.lo = lo;
    d.hi = hi;
    d.seed = seed;
    d.validate();
    return d;
  }

  void validate() const {
    if (kind == Kind::kConstant && !(value > 0.0)) {
      throw InvalidArgument("constant delay must be positive");
    }
    if (kind == Kind::kUniform && !(lo >= 0.0 && hi > lo)) {
      throw InvalidArgument("uniform delay needs 0 <= lo < hi");
    }
  }
};

inline constexpr long long kUnlimitedBudget = -1;

struct RunConfig {
  NodeId start_node = 0;
  // Number of handled deliveries after which the run stops; the initial
  // message counts. kUnlimitedBudget disables the limit.
  long long message_budget = kUnlimitedBudget;
  DelayModel delay;
  bool record_trace = true;
  // Further nodes that receive an initial message at time 0, after the start
  // node. Used by the multi-start tasks.
  std::vector<NodeId> extra_starts;
};

enum class HaltReason { kQueueEmpty, kBudget, kProgramHalt };

inline const char* to_string(HaltReason r) {
  switch (r) {
    case HaltReason::kQueueEmpty:
      return "queue_empty";
    case HaltReason::kBudget:
      return "budget";
    case HaltReason::kProgramHalt:
      return "program_halt";
  }
  return "unknown";
}

inline constexpr NodeId kNoSender = -1;

template <typename M>
struct Envelope {
  M payload;
  NodeId sender = kNoSender;
  double send_time = 0.0;
  double arrival_time = 0.0;
  std::uint64_t seq = 0;
  NodeId receiver = 0;
};

template <typename S, typename M>
struct Reaction {
  S state;
  std::optional<M> emit;
  bool halt = false;
};

template <typename S, typename M>
struct TraceStep {
  double arrival_time;
  NodeId receiver;
  Envelope<M> message;
  S state_before;
  S state_after;
  std::optional<M> emitted_payload;
};

template <typename S, typename M>
struct Trace {
  std::vector<TraceStep<S, M>> steps;
};

template <typename S, typename M>
struct RunResult {
  NodeId start_node = 0;
  std::vector<S> states;
  Trace<S, M> trace;
  HaltReason halt_reason = HaltReason::kQueueEmpty;
  long long deliveries = 0;
  double end_time = 0.0;
};

// A node program: per-node state initialization plus a message handler.
// `index` numbers the initial injections of a run (0 for the start node).
template <typename P>
concept NodeProgram = requires(P& p, const Graph& g, NodeId v, const typename P::State& s,
                               const typename P::Message& m, int index) {
  typename P::State;
  typename P::Message;
  { p.initial_state(g, v) } -> std::convertible_to<typename P::State>;
  { p.initial_message(g, v, index) } -> std::convertible_to<typename P::Message>;
  {
    p.on_message(g, v, s, m)
    } -> std::convertible_to<Reaction<typename P::State, typename P::Message>>;
};

// Optional hooks. A program may reject malformed messages (width checks) and
// report non-finite states; the engine turns these into typed errors.
template <typename P>
concept ChecksMessages = requires(const P& p, const typename P::Message& m) {
  { p.message_ok(m) } -> std::convertible_to<bool>;
};

template <typename P>
concept ChecksFinite = requires(const P& p, const typename P::State& s) {
  { p.is_finite(s) } -> std::convertible_to<bool>;
};

namespace detail {

template <typename M>
struct Later {
  bool operator()(const Envelope<M>& a, const Envelope<M>& b) const {
    if (a.arrival_time != b.arrival_time) return a.arrival_time > b.arrival_time;
    if (a.sender != b.sender) return a.sender > b.sender;
    return a.seq > b.seq;
  }
};

}  // namespace detail

// Executes one asynchronous run. Messages are delivered one at a time in
// ascending (arrival_time, sender, seq) order; each emission is copied to
// every neighbor of the emitter with its own delay.
template <NodeProgram P>
RunResult<typename P::State, typename P::Message> run(const Graph& g, P& program,
                                                     const RunConfig& cfg) {
  using S = typename P::State;
  using M = typename P::Message;
  const int n = g.num_nodes();
  auto check_start = [&](NodeId v) {
    if (v < 0 || v >= n) throw InvalidArgument("start node " + std::to_string(v) + " out of range");
  };
  check_start(cfg.start_node);
  for (NodeId v : cfg.extra_starts) check_start(v);
  cfg.delay.validate();

  RunResult<S, M> result;
  result.start_node = cfg.start_node;
  result.states.reserve(n);
  for (NodeId v = 0; v < n; ++v) result.states.push_back(program.initial_state(g, v));

  std::mt19937_64 rng(cfg.delay.seed);
  std::uniform_real_distribution<double> uniform(cfg.delay.lo, cfg.delay.hi);
  std::priority_queue<Envelope<M>, std::vector<Envelope<M>>, detail::Later<M>> queue;
  std::uint64_t seq = 0;

  auto check_message = [&](const M& m, long long step) {
    if constexpr (ChecksMessages<P>) {
      if (!program.message_ok(m)) {
        throw ContractViolation("message width mismatch at step " + std::to_string(step));
      }
    }
  };

  std::vector<NodeId> starts{cfg.start_node};
  starts.insert(starts.end(), cfg.extra_starts.begin(), cfg.extra_starts.end());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    Envelope<M> e{program.initial_message(g, starts[i], static_cast<int>(i)), kNoSender, 0.0, 0.0,
                  seq++, starts[i]};
    check_message(e.payload, 0);
    queue.push(std::move(e));
  }

  result.halt_reason = HaltReason::kQueueEmpty;
  while (!queue.empty()) {
    if (cfg.message_budget >= 0 && result.deliveries >= cfg.message_budget) {
      result.halt_reason = HaltReason::kBudget;
      break;
    }
    Envelope<M> e = queue.top();
    queue.pop();
    const long long step = result.deliveries++;
    result.end_time = e.arrival_time;
    S& slot = result.states[e.receiver];
    Reaction<S, M> r = program.on_message(g, e.receiver, slot, e.payload);
    if constexpr (ChecksFinite<P>) {
      if (!program.is_finite(r.state)) {
        throw NumericFailure("non-finite state at step " + std::to_string(step), step);
      }
    }
    if (r.emit) {
      check_message(*r.emit, step);
      const double shared = cfg.delay.kind == DelayModel::Kind::kConstant ? cfg.delay.value : 0.0;
      for (NodeId u : g.neighbors(e.receiver)) {
        double delay =
            cfg.delay.kind == DelayModel::Kind::kConstant ? shared : uniform(rng);
        queue.push(Envelope<M>{*r.emit, e.receiver, e.arrival_time,
                               e.arrival_time + delay, seq++, u});
      }
    }
    if (cfg.record_trace) {
      result.trace.steps.push_back(
          TraceStep<S, M>{e.arrival_time, e.receiver, e, slot, r.state, r.emit});
    }
    slot = std::move(r.state);
    if (r.halt) {
      result.halt_reason = HaltReason::kProgramHalt;
      break;
    }
  }
  return result;
}

// One independent run per node, each started at that node. Uniform delay
// seeds are derived per start so runs never share a stream.
template <NodeProgram P>
std::vector<RunResult<typename P::State, typename P::Message>> run_all_starts(
    const Graph& g, P& program, const RunConfig& cfg_template) {
  std::vector<RunResult<typename P::State, typename P::Message>> out;
  out.reserve(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    RunConfig cfg = cfg_template;
    cfg.start_node = v;
    cfg.extra_starts.clear();
    cfg.delay.seed = derive_seed(cfg_template.delay.seed, static_cast<std::uint64_t>(v));
    out.push_back(run(g, program, cfg));
  }
  return out;
}

}  // namespace amp
