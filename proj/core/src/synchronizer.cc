#include "amp/synchronizer.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "amp/error.h"
#include "amp/generators.h"
#include "amp/rng.h"

namespace amp {

namespace {

std::vector<double> sum(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

void add_into(std::vector<double>& acc, const std::vector<double>& m) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += m[i];
}

}  // namespace

SyncOutcome sync_transition(const SyncState& state, const SyncMessage& msg, int D,
                            const SginWeights& weights, OriginMode mode) {
  if (D < 1) throw InvalidArgument("degree must be >= 1");
  if (msg.pulse + msg.safe + msg.origin != 1) {
    throw ProtocolViolation("message must carry exactly one of pulse/safe/origin");
  }
  if (msg.m.size() != state.s.size() || static_cast<int>(state.s.size()) != weights.d) {
    throw ContractViolation("state/message width mismatch");
  }
  SyncOutcome out{state, std::nullopt, SyncRow::kHalted};
  SyncState& next = out.state;
  if (state.l == 0) return out;
  if (msg.origin) {
    out.row = SyncRow::kOrigin;
    if (mode == OriginMode::kCorrected) next.s.assign(state.s.size(), 0.0);
    next.w = D - 1;
    next.u = D;
    out.emit = SyncMessage::make_pulse(state.s);
    return out;
  }
  if (state.u == 0) {
    out.row = SyncRow::kUnsafeZero;
    out.emit = SyncMessage::make_pulse(state.s);
    if (D == 1) {
      next.s = weights.apply(msg.m);
      next.w = 0;
      next.u = D - 1;
      next.l = state.l - 1;
    } else {
      next.s = msg.m;
      next.w = D - 2;
      next.u = D;
    }
    return out;
  }
  if (msg.safe) {
    out.row = SyncRow::kSafe;
    next.u = state.u - 1;
    return out;
  }
  if (state.w == 0) {
    out.row = SyncRow::kWaitZero;
    next.s = weights.apply(sum(state.s, msg.m));
    next.u = state.u - 1;
    next.l = state.l - 1;
    out.emit = SyncMessage::make_safe(state.s);
    return out;
  }
  if (msg.pulse) {
    out.row = SyncRow::kPulse;
    next.s = sum(state.s, msg.m);
    next.w = state.w - 1;
    return out;
  }
  throw ProtocolViolation("no transition row matches");
}

SyncState TableSyncProgram::initial_state(const Graph& g, NodeId v) const {
  auto f = g.features(v);
  return {std::vector<double>(f.begin(), f.end()), 0, 0, layers_};
}

SyncMessage TableSyncProgram::initial_message(const Graph& g, NodeId, int) const {
  return SyncMessage::make_origin(std::vector<double>(g.feature_width(), 0.0));
}

Reaction<SyncState, SyncMessage> TableSyncProgram::on_message(const Graph& g, NodeId v,
                                                               const SyncState& s,
                                                               const SyncMessage& m) const {
  if (g.degree(v) == 0) {
    SyncState next = s;
    std::vector<double> zero(s.s.size(), 0.0);
    for (; next.l > 0; --next.l) next.s = weights_.apply(zero);
    return {next, std::nullopt};
  }
  auto out = sync_transition(s, m, g.degree(v), weights_, mode_);
  return {out.state, out.emit};
}

SyncSimulationProgram::SyncSimulationProgram(const SginModel& model, OriginMode mode)
    : model_(model), mode_(mode) {
  model_.validate();
}

SimState SyncSimulationProgram::initial_state(const Graph& g, NodeId v) const {
  SimState s;
  auto f = g.features(v);
  s.value.assign(f.begin(), f.end());
  s.acc.assign(model_.d, 0.0);
  s.early.assign(model_.d, 0.0);
  s.l = model_.num_layers();
  return s;
}

SimMessage SyncSimulationProgram::initial_message(const Graph&, NodeId, int) const {
  return {std::vector<double>(model_.d, 0.0), false, false, true};
}

bool SyncSimulationProgram::is_finite(const SimState& s) const {
  for (double x : s.value) {
    if (!std::isfinite(x)) return false;
  }
  for (double x : s.acc) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void SyncSimulationProgram::compute(SimState& s, int degree) const {
  if (s.absorbed != degree) {
    throw ProtocolViolation("round closed after " + std::to_string(s.absorbed) + " of " +
                            std::to_string(degree) + " pulses");
  }
  const int layer = model_.num_layers() - s.l;
  s.value = model_.layers[layer].apply(s.acc);
  --s.l;
  --s.u;
  s.computed = true;
}

Reaction<SimState, SimMessage> SyncSimulationProgram::on_message(const Graph& g, NodeId v,
                                                                  const SimState& before,
                                                                  const SimMessage& msg) const {
  const int D = g.degree(v);
  SimState s = before;
  if (s.done()) return {s, std::nullopt};

  auto open_round = [&](SimState& st) {
    st.acc = st.early;
    st.absorbed = st.early_count;
    st.w = D - st.early_count;
    st.early.assign(model_.d, 0.0);
    st.early_count = 0;
    st.u = D + 1;
    st.computed = false;
  };
  // Emission for a pulse of `payload`, finishing the round at once when all
  // of its pulses are already in.
  auto pulse_and_maybe_compute = [&](SimState& st) -> std::optional<SimMessage> {
    SimMessage out{st.value, true, false, false};
    if (st.w == 0) {
      compute(st, D);
      out.safe = st.l > 0;
    }
    return out;
  };

  if (!s.started) {
    if (msg.safe) throw ProtocolViolation("safe message reached node " + std::to_string(v) + " before its first pulse");
    s.started = true;
    s.round = 0;
    open_round(s);
    if (msg.origin) {
      if (mode_ == OriginMode::kVerbatim) s.acc = s.value;
      if (D == 0) {
        while (s.l > 0) {
          s.value = model_.layers[model_.num_layers() - s.l].apply(s.acc);
          s.acc.assign(model_.d, 0.0);
          --s.l;
        }
        s.computed = true;
        return {s, std::nullopt};
      }
      return {s, SimMessage{s.value, true, false, false}};
    }
    add_into(s.acc, msg.m);
    --s.w;
    ++s.absorbed;
    auto emit = pulse_and_maybe_compute(s);
    return {s, emit};
  }
  if (msg.origin) throw ProtocolViolation("second origin message at node " + std::to_string(v));

  if (!s.computed) {
    if (msg.safe) --s.u;
    if (msg.pulse) {
      if (s.w == 0) throw ProtocolViolation("surplus pulse at node " + std::to_string(v));
      add_into(s.acc, msg.m);
      --s.w;
      ++s.absorbed;
      if (s.w == 0) {
        compute(s, D);
        if (s.l == 0) return {s, std::nullopt};
        if (s.u == 0) {
          ++s.round;
          open_round(s);
          return {s, SimMessage{s.value, true, true, false}};
        }
        return {s, SimMessage{s.value, false, true, false}};
      }
    }
    return {s, std::nullopt};
  }

  if (msg.safe) --s.u;
  if (msg.pulse) {
    add_into(s.early, msg.m);
    if (++s.early_count > D) throw ProtocolViolation("surplus early pulse at node " + std::to_string(v));
  }
  if (s.u < 0) throw ProtocolViolation("surplus safe message at node " + std::to_string(v));
  if (s.u == 0) {
    ++s.round;
    open_round(s);
    auto emit = pulse_and_maybe_compute(s);
    return {s, emit};
  }
  return {s, std::nullopt};
}

SimulationResult simulate_sgin(const Graph& g, const SginModel& model, NodeId start,
                               const DelayModel& delay, OriginMode mode, bool record_trace,
                               Trace<SimState, SimMessage>* trace_out) {
  model.validate();
  if (g.feature_width() != model.d) throw ContractViolation("feature width does not match sGIN width");
  if (start < 0 || start >= g.num_nodes()) throw InvalidArgument("start node out of range");
  SimulationResult result;
  result.reached.assign(g.num_nodes(), model.num_layers() == 0);
  if (model.num_layers() == 0) {
    result.outputs = feature_vectors(g);
    return result;
  }
  SyncSimulationProgram program(model, mode);
  RunConfig cfg;
  cfg.start_node = start;
  cfg.delay = delay;
  cfg.record_trace = record_trace;
  cfg.message_budget = 20LL * model.num_layers() * g.num_edges() + 1;
  auto run_result = run(g, program, cfg);
  if (run_result.halt_reason == HaltReason::kBudget) {
    throw ProtocolFailure("synchronizer still active after " + std::to_string(cfg.message_budget) +
                          " deliveries");
  }
  result.deliveries = run_result.deliveries;
  result.virtual_time = run_result.end_time;
  result.outputs.resize(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    const SimState& s = run_result.states[v];
    result.reached[v] = s.started;
    if (s.started && !s.done()) {
      throw ProtocolFailure("node " + std::to_string(v) + " stopped with " + std::to_string(s.l) +
                            " layers left");
    }
    result.outputs[v] = s.value;
  }
  if (trace_out) *trace_out = std::move(run_result.trace);
  return result;
}

SimVerification verify_simulation(int graphs, int max_n, int layers, std::uint64_t seed,
                                  const DelayModel& delay, int max_degree, int d) {
  if (graphs < 0 || max_n < 2 || layers < 1) {
    throw InvalidArgument("need graphs >= 0, max_n >= 2 and layers >= 1");
  }
  SimVerification out;
  out.graphs = graphs;
  for (int i = 0; i < graphs; ++i) {
    const std::uint64_t gseed = derive_seed(seed, static_cast<std::uint64_t>(i));
    std::mt19937_64 rng(gseed);
    const int n = std::uniform_int_distribution<int>(2, max_n)(rng);
    const Graph g = generate_bounded_degree_graph(n, max_degree, d, derive_seed(gseed, 1));
    for (int L = 1; L <= layers; ++L) {
      const std::uint64_t rseed = derive_seed(gseed, 100 + static_cast<std::uint64_t>(L));
      const SginModel model = random_sgin_model(d, L, rseed);
      const NodeId start = std::uniform_int_distribution<NodeId>(0, n - 1)(rng);
      DelayModel dm = delay;
      dm.seed = derive_seed(rseed, 1);
      ++out.runs;
      try {
        const auto sim = simulate_sgin(g, model, start, dm);
        const auto ref = sgin_forward(g, model);
        for (NodeId v = 0; v < n; ++v) {
          if (!sim.reached[v]) {
            ++out.failures;
            break;
          }
          for (int k = 0; k < d; ++k) {
            out.max_deviation = std::max(out.max_deviation, std::abs(sim.outputs[v][k] - ref[v][k]));
          }
        }
      } catch (const ProtocolFailure&) {
        ++out.failures;
      } catch (const ProtocolViolation&) {
        ++out.failures;
      }
    }
  }
  return out;
}

nlohmann::ordered_json trace_state(const SyncState& s) {
  return {{"s", s.s}, {"w", s.w}, {"u", s.u}, {"l", s.l}};
}

nlohmann::ordered_json trace_payload(const SyncMessage& m) { return m.m; }

nlohmann::ordered_json trace_bits(const SyncMessage& m) {
  return {{"pulse", m.pulse}, {"safe", m.safe}, {"origin", m.origin}};
}

nlohmann::ordered_json trace_state(const SimState& s) {
  return {{"value", s.value}, {"acc", s.acc},     {"w", s.w},
          {"u", s.u},         {"l", s.l},         {"round", s.round},
          {"early_count", s.early_count},         {"computed", s.computed}};
}

nlohmann::ordered_json trace_payload(const SimMessage& m) { return m.m; }

nlohmann::ordered_json trace_bits(const SimMessage& m) {
  return {{"pulse", m.pulse}, {"safe", m.safe}, {"origin", m.origin}};
}

}  // namespace amp
