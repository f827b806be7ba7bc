#pragma once

#include <ostream>

#include <nlohmann/json.hpp>

#include "amp/engine.h"

namespace amp {

// JSON-lines trace dump. A program's State and Message types opt in by
// providing ADL-visible `trace_state(const State&)`,
// `trace_payload(const Message&)` and `trace_bits(const Message&)`, each
// returning nlohmann::ordered_json.
template <typename S, typename M>
nlohmann::ordered_json trace_step_json(const TraceStep<S, M>& step) {
  nlohmann::ordered_json msg;
  msg["payload"] = trace_payload(step.message.payload);
  if (step.message.sender == kNoSender) {
    msg["sender"] = nullptr;
  } else {
    msg["sender"] = step.message.sender;
  }
  msg["protocol_bits"] = trace_bits(step.message.payload);
  msg["send_time"] = step.message.send_time;
  msg["seq"] = step.message.seq;

  nlohmann::ordered_json line;
  line["arrival_time"] = step.arrival_time;
  line["receiver"] = step.receiver;
  line["message"] = std::move(msg);
  line["state_before"] = trace_state(step.state_before);
  line["state_after"] = trace_state(step.state_after);
  if (step.emitted_payload) {
    line["emitted_payload"] = trace_payload(*step.emitted_payload);
  } else {
    line["emitted_payload"] = nullptr;
  }
  return line;
}

template <typename S, typename M>
void write_trace_jsonl(std::ostream& out, const Trace<S, M>& trace) {
  for (const auto& step : trace.steps) out << trace_step_json(step).dump() << '\n';
}

}  // namespace amp
