#include "amp/amp_model.h"

#include <fstream>
#include <random>

#include "amp/error.h"

namespace amp {

const char* to_string(HaltingKind kind) {
  switch (kind) {
    case HaltingKind::kNone:
      return "none";
    case HaltingKind::kAct:
      return "act";
    case HaltingKind::kIter:
      return "iter";
  }
  return "unknown";
}

HaltingKind halting_kind_from_string(const std::string& s) {
  if (s == "none") return HaltingKind::kNone;
  if (s == "act") return HaltingKind::kAct;
  if (s == "iter") return HaltingKind::kIter;
  throw InvalidArgument("unknown halting kind `" + s + "`");
}

void AmpCellConfig::validate() const {
  if (state_width < 1) throw InvalidArgument("state_width must be >= 1");
  if (message_width < 1) throw InvalidArgument("message_width must be >= 1");
  if (halting != HaltingKind::kNone && !(epsilon > 0.0 && epsilon <= 0.5)) {
    throw InvalidArgument("epsilon must lie in (0, 0.5]");
  }
}

nlohmann::ordered_json AmpCellConfig::to_json() const {
  nlohmann::ordered_json j;
  j["cell"] = amp::to_string(cell);
  j["state_width"] = state_width;
  j["message_width"] = message_width;
  j["skip_connection"] = skip_connection;
  j["halting"] = amp::to_string(halting);
  j["epsilon"] = epsilon;
  j["send_gate"] = send_gate;
  j["seed"] = seed;
  return j;
}

AmpCellConfig AmpCellConfig::from_json(const nlohmann::json& j) {
  static const char* kKeys[] = {"cell", "state_width", "message_width", "skip_connection",
                                "halting", "epsilon", "send_gate", "seed"};
  if (!j.is_object()) throw InvalidArgument("model config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : kKeys) known = known || it.key() == k;
    if (!known) throw InvalidArgument("unknown model config key `" + it.key() + "`");
  }
  AmpCellConfig c;
  try {
    if (j.contains("cell")) c.cell = cell_kind_from_string(j["cell"].get<std::string>());
    c.state_width = j.value("state_width", c.state_width);
    c.message_width = j.value("message_width", c.message_width);
    c.skip_connection = j.value("skip_connection", c.skip_connection);
    if (j.contains("halting")) c.halting = halting_kind_from_string(j["halting"].get<std::string>());
    c.epsilon = j.value("epsilon", c.epsilon);
    c.send_gate = j.value("send_gate", c.send_gate);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::ordered_json TaskShape::to_json() const {
  return {{"input_width", input_width},
          {"origin_channels", origin_channels},
          {"num_classes", num_classes},
          {"num_heads", num_heads}};
}

TaskShape TaskShape::from_json(const nlohmann::json& j) {
  TaskShape s;
  s.input_width = j.at("input_width").get<int>();
  s.origin_channels = j.at("origin_channels").get<int>();
  s.num_classes = j.at("num_classes").get<int>();
  s.num_heads = j.at("num_heads").get<int>();
  return s;
}

namespace {

void check_shape(const TaskShape& s) {
  if (s.input_width < 1 || s.origin_channels < 1 || s.num_classes < 2 || s.num_heads < 1) {
    throw InvalidArgument("task shape needs positive widths and at least 2 classes");
  }
}

}  // namespace

AmpModel::AmpModel(const AmpCellConfig& cfg, const TaskShape& shape) : cfg_(cfg), shape_(shape) {
  cfg_.validate();
  check_shape(shape_);
  std::mt19937_64 rng(cfg_.seed);
  const int H = cfg_.state_width;
  params_.add("in.W", glorot_uniform(shape_.input_width, H, rng));
  params_.add("in.b", Tensor(1, H));
  add_cell_params(params_, "cell", cfg_.cell, cell_input_width(), H, rng);
  params_.add("msg.W", glorot_uniform(H, cfg_.message_width, rng));
  params_.add("msg.b", Tensor(1, cfg_.message_width));
  if (cfg_.halting != HaltingKind::kNone) {
    params_.add("halt.W", glorot_uniform(H, 1, rng));
    params_.add("halt.b", Tensor(1, 1));
  }
  if (cfg_.send_gate) {
    params_.add("gate.W", glorot_uniform(H, 1, rng));
    params_.add("gate.b", Tensor(1, 1));
  }
  for (int k = 0; k < shape_.num_heads; ++k) {
    params_.add("head" + std::to_string(k) + ".W", glorot_uniform(H, shape_.num_classes, rng));
    params_.add("head" + std::to_string(k) + ".b", Tensor(1, shape_.num_classes));
  }
}

AmpModel::AmpModel(const AmpCellConfig& cfg, const TaskShape& shape, ParameterStore params)
    : AmpModel(cfg, shape) {
  for (int i = 0; i < params_.size(); ++i) {
    auto& e = params_.entry(i);
    if (!params.contains(e.name)) throw ContractViolation("checkpoint lacks parameter " + e.name);
    const Tensor& v = params.value(e.name);
    if (!v.same_shape(e.value)) throw ContractViolation("checkpoint shape mismatch for " + e.name);
    e.value = v;
  }
  if (params.size() != params_.size()) throw ContractViolation("checkpoint has extra parameters");
  params_.adam_steps = params.adam_steps;
}

nlohmann::json AmpModel::checkpoint() const {
  nlohmann::json j = params_.to_json();
  j["model"] = cfg_.to_json();
  j["task_shape"] = shape_.to_json();
  return j;
}

AmpModel AmpModel::from_checkpoint(const nlohmann::json& j) {
  return AmpModel(AmpCellConfig::from_json(j.at("model")), TaskShape::from_json(j.at("task_shape")),
                  ParameterStore::from_json(j));
}

void AmpModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write checkpoint " + path);
  out << checkpoint().dump() << '\n';
}

AmpModel AmpModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read checkpoint " + path);
  nlohmann::json j;
  try {
    in >> j;
    return from_checkpoint(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 1, e.what());
  }
}

HaltingState act_update(Tape& t, const HaltingState& hs, Var h, Var p, double eps) {
  HaltingState out = hs;
  if (hs.halted) return out;
  const double total = t.value(hs.cumulative).data[0] + t.value(p).data[0];
  if (total >= 1.0 - eps) {
    out.weighted = t.add(hs.weighted, t.scalar_mul(t.one_minus(hs.cumulative), h));
    out.cumulative = t.constant(Tensor(1, 1, 1.0));
    out.halted = true;
  } else {
    out.weighted = t.add(hs.weighted, t.scalar_mul(p, h));
    out.cumulative = t.add(hs.cumulative, p);
  }
  return out;
}

HaltingState iter_update(Tape& t, const HaltingState& hs, Var h, Var c, double eps) {
  HaltingState out = hs;
  if (hs.halted) return out;
  out.weighted = t.add(hs.weighted, t.scalar_mul(t.hadamard(c, hs.cumulative), h));
  out.cumulative = t.hadamard(hs.cumulative, t.one_minus(c));
  if (t.value(out.cumulative).data[0] < eps) {
    out.weighted = t.add(out.weighted, t.scalar_mul(out.cumulative, h));
    out.halted = true;
  }
  return out;
}

AmpNodeState amp_initial_state(Tape& t, const AmpModel& model, const Graph& g, NodeId v) {
  const auto f = g.features(v);
  if (static_cast<int>(f.size()) != model.shape().input_width) {
    throw ContractViolation("node feature width " + std::to_string(f.size()) +
                            " does not match model input width " +
                            std::to_string(model.shape().input_width));
  }
  const int H = model.config().state_width;
  AmpNodeState s;
  Var x = t.constant(Tensor::row(std::vector<double>(f.begin(), f.end())));
  s.h = t.tanh(t.affine(x, t.param("in.W"), t.param("in.b")));
  if (model.config().cell == CellKind::kLstm) s.c = t.constant(Tensor(1, H));
  if (model.config().halting != HaltingKind::kNone) {
    const double start = model.config().halting == HaltingKind::kIter ? 1.0 : 0.0;
    s.halting.cumulative = t.constant(Tensor(1, 1, start));
    s.halting.weighted = t.constant(Tensor(1, H));
  }
  return s;
}

AmpStepResult amp_step(Tape& t, const AmpModel& model, const AmpNodeState& state,
                       const AmpMessage& msg) {
  const auto& cfg = model.config();
  AmpStepResult out{state, std::nullopt};
  if (state.halting.halted) return out;
  if (t.value(msg.payload).cols != cfg.message_width) {
    throw ContractViolation("message width mismatch");
  }
  Tensor origin(1, model.shape().origin_channels);
  if (msg.origin >= 0) {
    if (msg.origin >= model.shape().origin_channels) throw ContractViolation("origin channel out of range");
    origin.data[msg.origin] = 1.0;
  }
  Var x = t.concat(msg.payload, t.constant(std::move(origin)));
  AmpNodeState& s = out.state;
  s.touched = true;
  ++s.messages;
  Var h;
  switch (cfg.cell) {
    case CellKind::kRnn:
      h = rnn_cell(t, "cell", state.h, x);
      break;
    case CellKind::kGru:
      h = gru_cell(t, "cell", state.h, x);
      break;
    case CellKind::kLstm: {
      auto r = lstm_cell(t, "cell", state.h, state.c, x);
      h = r.h;
      s.c = r.c;
      break;
    }
  }
  if (cfg.skip_connection) h = t.add(h, state.h);
  s.h = h;
  if (cfg.halting != HaltingKind::kNone) {
    Var p = t.sigmoid(t.affine(h, t.param("halt.W"), t.param("halt.b")));
    s.halting = cfg.halting == HaltingKind::kAct ? act_update(t, state.halting, h, p, cfg.epsilon)
                                                 : iter_update(t, state.halting, h, p, cfg.epsilon);
  }
  Var m = t.tanh(t.affine(h, t.param("msg.W"), t.param("msg.b")));
  if (cfg.send_gate) {
    Var gate = t.sigmoid(t.affine(h, t.param("gate.W"), t.param("gate.b")));
    if (t.value(gate).data[0] < 0.5) return out;
    m = t.scalar_mul(gate, m);
  }
  out.emit = AmpMessage{m, -1};
  return out;
}

Var readout_embedding(Tape& t, const AmpModel& model, const AmpNodeState& state) {
  switch (model.config().halting) {
    case HaltingKind::kNone:
      return state.h;
    case HaltingKind::kAct:
      if (state.halting.halted) return state.halting.weighted;
      return t.add(state.halting.weighted, t.scalar_mul(t.one_minus(state.halting.cumulative), state.h));
    case HaltingKind::kIter:
      if (state.halting.halted) return state.halting.weighted;
      return t.add(state.halting.weighted, t.scalar_mul(state.halting.cumulative, state.h));
  }
  return state.h;
}

Var readout_node(Tape& t, const AmpModel& model, Var embedding, int head) {
  if (head < 0 || head >= model.shape().num_heads) throw ContractViolation("head index out of range");
  const std::string p = "head" + std::to_string(head);
  return t.affine(embedding, t.param(p + ".W"), t.param(p + ".b"));
}

Var pool_runs(Tape& t, const AmpModel& model, const std::vector<Var>& embeddings) {
  if (embeddings.empty()) throw InvalidArgument("pool_runs needs at least one run");
  Var acc = embeddings[0];
  for (std::size_t i = 1; i < embeddings.size(); ++i) acc = t.add(acc, embeddings[i]);
  if (embeddings.size() > 1) acc = t.scale(acc, 1.0 / static_cast<double>(embeddings.size()));
  return readout_node(t, model, acc, 0);
}

AmpNodeState AmpProgram::initial_state(const Graph& g, NodeId v) {
  if (v == 0) {
    touched_ = 0;
    halted_ = 0;
  }
  return amp_initial_state(tape_, model_, g, v);
}

AmpMessage AmpProgram::initial_message(const Graph&, NodeId, int index) {
  return {tape_.constant(Tensor(1, model_.config().message_width)), index};
}

Reaction<AmpNodeState, AmpMessage> AmpProgram::on_message(const Graph&, NodeId, const AmpNodeState& s,
                                                          const AmpMessage& m) {
  auto r = amp_step(tape_, model_, s, m);
  Reaction<AmpNodeState, AmpMessage> out{r.state, r.emit, false};
  if (model_.config().halting != HaltingKind::kNone) {
    if (!s.touched && r.state.touched) ++touched_;
    if (!s.halting.halted && r.state.halting.halted) ++halted_;
    out.halt = touched_ > 0 && touched_ == halted_;
  }
  return out;
}

bool AmpProgram::message_ok(const AmpMessage& m) const {
  return tape_.value(m.payload).cols == model_.config().message_width;
}

bool AmpProgram::is_finite(const AmpNodeState& s) const { return tape_.value(s.h).all_finite(); }

}  // namespace amp
