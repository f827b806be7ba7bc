#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "amp/autodiff.h"
#include "amp/cells.h"
#include "amp/engine.h"
#include "amp/graph.h"

namespace amp {

enum class HaltingKind { kNone, kAct, kIter };

const char* to_string(HaltingKind kind);
HaltingKind halting_kind_from_string(const std::string& s);

struct AmpCellConfig {
  int state_width = 16;
  int message_width = 10;
  CellKind cell = CellKind::kRnn;
  bool skip_connection = false;
  HaltingKind halting = HaltingKind::kNone;
  double epsilon = 0.01;
  bool send_gate = false;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static AmpCellConfig from_json(const nlohmann::json& j);
};

// Dimensions fixed by the task rather than the model file.
struct TaskShape {
  int input_width = 1;
  // Width of the one-hot origin channel appended to every cell input; the
  // initial message of start i sets channel i.
  int origin_channels = 1;
  int num_classes = 2;
  int num_heads = 1;

  nlohmann::ordered_json to_json() const;
  static TaskShape from_json(const nlohmann::json& j);
};

class AmpModel {
 public:
  // Fresh parameters: Glorot-uniform matrices and zero biases from cfg.seed.
  AmpModel(const AmpCellConfig& cfg, const TaskShape& shape);
  AmpModel(const AmpCellConfig& cfg, const TaskShape& shape, ParameterStore params);

  const AmpCellConfig& config() const { return cfg_; }
  const TaskShape& shape() const { return shape_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }
  int cell_input_width() const { return cfg_.message_width + shape_.origin_channels; }

  // Checkpoint: parameters plus the model and task descriptions.
  nlohmann::json checkpoint() const;
  static AmpModel from_checkpoint(const nlohmann::json& j);
  void save(const std::string& path) const;
  static AmpModel load(const std::string& path);

 private:
  AmpCellConfig cfg_;
  TaskShape shape_;
  ParameterStore params_;
};

// Running halting bookkeeping. For ACT, `cumulative` is the sum of halting
// probabilities so far; for Iter it is the product of (1 - confidence).
// `weighted` is the running combination of states.
struct HaltingState {
  Var cumulative;
  Var weighted;
  bool halted = false;
};

// ACT: halt on the first message where cumulative + p >= 1 - eps; that
// state gets the remainder 1 - cumulative, earlier states their p.
HaltingState act_update(Tape& t, const HaltingState& hs, Var h, Var p, double eps);
// Iter: weighted += c * cumulative * h, cumulative *= 1 - c; halt once
// cumulative < eps, folding the remaining mass cumulative * h into weighted.
HaltingState iter_update(Tape& t, const HaltingState& hs, Var h, Var c, double eps);

struct AmpNodeState {
  Var h;
  Var c;  // LSTM cell state
  HaltingState halting;
  bool touched = false;
  int messages = 0;
};

struct AmpMessage {
  Var payload;
  int origin = -1;  // origin channel of an initial message, else -1
};

struct AmpStepResult {
  AmpNodeState state;
  std::optional<AmpMessage> emit;
};

AmpNodeState amp_initial_state(Tape& t, const AmpModel& model, const Graph& g, NodeId v);

// One message delivery. Halted nodes return their state unchanged and stay
// silent. A node that halts on this message still emits for it.
AmpStepResult amp_step(Tape& t, const AmpModel& model, const AmpNodeState& state,
                       const AmpMessage& msg);

// Final embedding: the raw state without halting; otherwise the weighted
// combination, completed with the unassigned mass on the current state for
// nodes that have not halted.
Var readout_embedding(Tape& t, const AmpModel& model, const AmpNodeState& state);
// Affine head `head` -> 1 x num_classes logits.
Var readout_node(Tape& t, const AmpModel& model, Var embedding, int head = 0);
// Mean of per-run embeddings, then head 0. Throws InvalidArgument if empty.
Var pool_runs(Tape& t, const AmpModel& model, const std::vector<Var>& embeddings);

// The trainable node program. Records every step on the given tape. With a
// halting mechanism the program signals global halt once every node that
// received a message has halted.
class AmpProgram {
 public:
  using State = AmpNodeState;
  using Message = AmpMessage;

  AmpProgram(const AmpModel& model, Tape& tape) : model_(model), tape_(tape) {}

  State initial_state(const Graph& g, NodeId v);
  Message initial_message(const Graph& g, NodeId start, int index);
  Reaction<State, Message> on_message(const Graph& g, NodeId v, const State& s, const Message& m);
  bool message_ok(const Message& m) const;
  bool is_finite(const State& s) const;

 private:
  const AmpModel& model_;
  Tape& tape_;
  int touched_ = 0;
  int halted_ = 0;
};

}  // namespace amp
