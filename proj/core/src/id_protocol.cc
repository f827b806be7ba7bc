#include "amp/id_protocol.h"

#include <algorithm>
#include <map>
#include <string>

#include "amp/error.h"
#include "amp/generators.h"
#include "amp/rng.h"

namespace amp {

const char* to_string(IdRole role) {
  switch (role) {
    case IdRole::kAssigning:
      return "assigning";
    case IdRole::kHaving:
      return "having";
    case IdRole::kTaking:
      return "taking";
    case IdRole::kYielding:
      return "yielding";
  }
  return "unknown";
}

const char* to_string(IdMsgType type) {
  switch (type) {
    case IdMsgType::kOffer:
      return "offer";
    case IdMsgType::kConfirm:
      return "confirm";
    case IdMsgType::kClaim:
      return "claim";
    case IdMsgType::kSurrender:
      return "surrender";
    case IdMsgType::kOrigin:
      return "origin";
  }
  return "unknown";
}

IdOutcome center_transition(const IdNodeState& state, const IdMessage& msg, int D) {
  IdOutcome out{state, std::nullopt};
  IdNodeState& s = out.state;
  if (msg.type == IdMsgType::kOrigin) {
    if (state.role == IdRole::kAssigning) throw ProtocolViolation("center received a second origin");
    if (D < 1) {
      s = {0, 0, 0, 0, 0, IdRole::kHaving};
      return out;
    }
    s = {0, 0, 0, D, D, IdRole::kAssigning};
    out.emit = IdMessage{1, 0, IdMsgType::kOffer};
    return out;
  }
  if (state.role == IdRole::kHaving) return out;
  if (state.role != IdRole::kAssigning) throw ProtocolViolation("center is not assigning");
  if (msg.attempt != state.attempt_try) return out;
  switch (msg.type) {
    case IdMsgType::kClaim:
      if (s.c == 0) {
        s.c = 1;
        --s.w;
      } else {
        ++s.attempt_try;
        s.c = 0;
        s.w = s.x;
        out.emit = IdMessage{msg.cid, s.attempt_try, IdMsgType::kOffer};
        return out;
      }
      break;
    case IdMsgType::kSurrender:
      --s.w;
      break;
    default:
      throw ProtocolViolation(std::string("center cannot handle ") + to_string(msg.type));
  }
  if (s.w < 0) throw ProtocolViolation("center received more replies than expected");
  if (s.w > 0) return out;
  if (s.c != 1) throw ProtocolViolation("attempt resolved without a claimer");
  --s.x;
  s.c = 0;
  if (s.x == 0) {
    s = {0, 0, 0, 0, 0, IdRole::kHaving};
    out.emit = IdMessage{msg.cid, msg.attempt, IdMsgType::kConfirm};
    return out;
  }
  ++s.attempt_try;
  s.w = s.x;
  out.emit = IdMessage{msg.cid + 1, s.attempt_try, IdMsgType::kOffer};
  return out;
}

IdOutcome outer_transition(const IdNodeState& state, const IdMessage& msg) {
  IdOutcome out{state, std::nullopt};
  IdNodeState& s = out.state;
  if (msg.type == IdMsgType::kOrigin) throw ProtocolViolation("outer node received origin");
  if (state.role == IdRole::kAssigning) throw ProtocolViolation("outer node in assigning role");
  if (state.role == IdRole::kHaving) return out;
  const bool newer = msg.attempt > state.attempt_try;
  const bool taking = state.role == IdRole::kTaking;
  auto settle = [&] {
    s = {0, state.id, 0, 0, 0, IdRole::kHaving};
    return out;
  };
  if (taking && msg.type == IdMsgType::kConfirm) return settle();
  if (taking && newer && msg.type == IdMsgType::kOffer && msg.cid != state.id) return settle();
  if (taking && newer && msg.type == IdMsgType::kClaim && msg.cid != state.id) return settle();
  if (newer && msg.type == IdMsgType::kOffer) {
    s = {msg.attempt, msg.cid, 0, 0, 0, IdRole::kTaking};
    out.emit = IdMessage{msg.cid, msg.attempt, IdMsgType::kClaim};
    return out;
  }
  if (newer && msg.type == IdMsgType::kClaim) {
    s = {msg.attempt, 0, 0, 0, 0, IdRole::kYielding};
    out.emit = IdMessage{msg.cid, msg.attempt, IdMsgType::kSurrender};
    return out;
  }
  return out;
}

IdNodeState IdStarProgram::initial_state(const Graph&, NodeId) const { return {}; }

IdMessage IdStarProgram::initial_message(const Graph&, NodeId, int) const {
  return {0, 0, IdMsgType::kOrigin};
}

Reaction<IdNodeState, IdMessage> IdStarProgram::on_message(const Graph& g, NodeId v,
                                                           const IdNodeState& s,
                                                           const IdMessage& m) {
  IdOutcome out = v == center_ ? center_transition(s, m, g.degree(v)) : outer_transition(s, m);
  if (out.emit) {
    if (first_emission_.size() < static_cast<std::size_t>(g.num_nodes())) {
      first_emission_.resize(g.num_nodes());
    }
    if (!first_emission_[v]) first_emission_[v] = out.emit->type;
    if (v == center_ && out.emit->type == IdMsgType::kOffer) {
      attempts_.push_back({out.emit->attempt, out.emit->cid, out.state.x, false});
    }
  }
  return {out.state, out.emit};
}

StarAssignment assign_ids_star(int k, std::uint64_t seed) {
  if (k < 1) throw InvalidArgument("star needs k >= 1");
  Graph g = star_graph(k);
  IdStarProgram program(0);
  RunConfig cfg;
  cfg.start_node = 0;
  cfg.delay = DelayModel::uniform(0.0, 1.0, seed);
  cfg.message_budget = kIdDeliveryCap;
  cfg.record_trace = false;
  auto result = run(g, program, cfg);
  if (result.halt_reason == HaltReason::kBudget) {
    throw ProtocolFailure("ID protocol did not settle within " + std::to_string(kIdDeliveryCap) +
                          " deliveries");
  }
  StarAssignment out;
  out.deliveries = result.deliveries;
  out.virtual_time = result.end_time;
  out.attempts = program.attempts();
  // An attempt was won when the center moved on to a new ID or confirmed.
  for (std::size_t i = 0; i < out.attempts.size(); ++i) {
    out.attempts[i].resolved =
        i + 1 == out.attempts.size() || out.attempts[i + 1].cid != out.attempts[i].cid;
  }
  for (NodeId v = 0; v <= k; ++v) {
    const auto& s = result.states[v];
    if (s.role != IdRole::kHaving) {
      throw ProtocolFailure("node " + std::to_string(v) + " ended in role " + to_string(s.role));
    }
    out.ids.push_back(s.id);
  }
  if (!is_bijection(out.ids)) throw ProtocolFailure("ID assignment is not a bijection");
  if (k >= 2 && program.first_emission().size() > 1) {
    out.first_reply_surrender = program.first_emission()[1] == IdMsgType::kSurrender;
  }
  return out;
}

bool is_bijection(const std::vector<int>& ids) {
  std::vector<char> seen(ids.size(), 0);
  for (int id : ids) {
    if (id < 0 || id >= static_cast<int>(ids.size()) || seen[id]) return false;
    seen[id] = 1;
  }
  return true;
}

std::vector<int> assign_ids_general(const Graph& g, std::uint64_t seed, NodeId start) {
  const int n = g.num_nodes();
  if (n == 0) return {};
  if (!is_connected(g)) throw InvalidArgument("ID assignment needs a connected graph");
  if (start < 0 || start >= n) throw InvalidArgument("start node out of range");
  std::vector<int> ids(n, -1);
  ids[start] = 0;
  int max_id = 0;
  // Centers in ID order; IDs are handed out in increasing order, so the
  // next center is always the holder of the next ID.
  std::map<int, NodeId> by_id{{0, start}};
  std::uint64_t round = 0;
  for (auto it = by_id.begin(); it != by_id.end(); ++it) {
    const NodeId center = it->second;
    std::vector<NodeId> fresh;
    for (NodeId u : g.neighbors(center)) {
      if (ids[u] < 0) fresh.push_back(u);
    }
    if (fresh.empty()) continue;
    StarAssignment star =
        assign_ids_star(static_cast<int>(fresh.size()), derive_seed(seed, round++));
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      const int id = max_id + star.ids[i + 1];
      ids[fresh[i]] = id;
      by_id.emplace(id, fresh[i]);
    }
    max_id += static_cast<int>(fresh.size());
  }
  // Rank-compress onto 0..n-1.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return ids[a] < ids[b]; });
  std::vector<int> ranked(n);
  for (int r = 0; r < n; ++r) ranked[order[r]] = r;
  return ranked;
}

nlohmann::ordered_json IdReport::to_json() const {
  nlohmann::ordered_json j;
  j["k"] = k;
  j["trials"] = trials;
  j["uniqueness_failures"] = uniqueness_failures;
  j["mean_deliveries"] = mean_deliveries;
  j["mean_virtual_time"] = mean_virtual_time;
  j["surrender_prob_estimate"] = surrender_prob_estimate;
  j["mean_attempts"] = mean_attempts;
  if (k == 2) j["fixed_node_attempts_per_win"] = fixed_node_attempts_per_win;
  return j;
}

IdReport id_monte_carlo(int k, int trials, std::uint64_t seed, int surrender_trials) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  IdReport report;
  report.k = k;
  report.trials = trials;
  double deliveries = 0.0, time = 0.0, attempts = 0.0;
  long long contested = 0, fixed_wins = 0;
  for (int t = 0; t < trials; ++t) {
    StarAssignment a;
    try {
      a = assign_ids_star(k, derive_seed(seed, static_cast<std::uint64_t>(t)));
    } catch (const ProtocolFailure&) {
      ++report.uniqueness_failures;
      continue;
    }
    deliveries += static_cast<double>(a.deliveries);
    time += a.virtual_time;
    attempts += static_cast<double>(a.attempts.size());
    if (k == 2) {
      for (const auto& rec : a.attempts) {
        if (rec.contenders != 2) continue;
        ++contested;
        if (rec.resolved && a.ids[1] == rec.cid) ++fixed_wins;
      }
    }
  }
  const int ok = trials - report.uniqueness_failures;
  if (ok > 0) {
    report.mean_deliveries = deliveries / ok;
    report.mean_virtual_time = time / ok;
    report.mean_attempts = attempts / ok;
  }
  if (fixed_wins > 0) {
    report.fixed_node_attempts_per_win = static_cast<double>(contested) / fixed_wins;
  }
  if (surrender_trials > 0) {
    long long surrendered = 0;
    const std::uint64_t base = mix_seed(seed ^ 0x5eed5eed5eedULL);
    for (int t = 0; t < surrender_trials; ++t) {
      if (assign_ids_star(2, derive_seed(base, static_cast<std::uint64_t>(t))).first_reply_surrender) {
        ++surrendered;
      }
    }
    report.surrender_prob_estimate = static_cast<double>(surrendered) / surrender_trials;
  }
  return report;
}

nlohmann::ordered_json trace_state(const IdNodeState& s) {
  return {{"try", s.attempt_try}, {"id", s.id}, {"c", s.c},
          {"w", s.w},             {"x", s.x},   {"role", to_string(s.role)}};
}

nlohmann::ordered_json trace_payload(const IdMessage& m) {
  return {{"cid", m.cid}, {"attempt", m.attempt}};
}

nlohmann::ordered_json trace_bits(const IdMessage& m) {
  nlohmann::ordered_json bits;
  for (auto t : {IdMsgType::kOffer, IdMsgType::kConfirm, IdMsgType::kClaim, IdMsgType::kSurrender,
                 IdMsgType::kOrigin}) {
    bits[to_string(t)] = m.type == t;
  }
  return bits;
}

}  // namespace amp
