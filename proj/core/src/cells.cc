#include "amp/cells.h"

#include "amp/error.h"

namespace amp {

const char* to_string(CellKind kind) {
  switch (kind) {
    case CellKind::kRnn:
      return "rnn";
    case CellKind::kGru:
      return "gru";
    case CellKind::kLstm:
      return "lstm";
  }
  return "unknown";
}

CellKind cell_kind_from_string(const std::string& s) {
  if (s == "rnn") return CellKind::kRnn;
  if (s == "gru") return CellKind::kGru;
  if (s == "lstm") return CellKind::kLstm;
  throw InvalidArgument("unknown cell kind `" + s + "`");
}

namespace {

const char* gates(CellKind kind) {
  switch (kind) {
    case CellKind::kRnn:
      return "h";
    case CellKind::kGru:
      return "zrn";
    case CellKind::kLstm:
      return "ifog";
  }
  return "";
}

// x W_gate + h U_gate + b_gate
Var gate_pre(Tape& t, const std::string& prefix, char gate, Var x, Var h) {
  const std::string g(1, gate);
  return t.add(t.add(t.matmul(x, t.param(prefix + ".W" + g)), t.matmul(h, t.param(prefix + ".U" + g))),
               t.param(prefix + ".b" + g));
}

}  // namespace

void add_cell_params(ParameterStore& store, const std::string& prefix, CellKind kind, int in_width,
                     int hidden, std::mt19937_64& rng) {
  if (in_width < 1 || hidden < 1) throw InvalidArgument("cell widths must be positive");
  for (const char* g = gates(kind); *g; ++g) {
    const std::string s(1, *g);
    store.add(prefix + ".W" + s, glorot_uniform(in_width, hidden, rng));
    store.add(prefix + ".U" + s, glorot_uniform(hidden, hidden, rng));
    store.add(prefix + ".b" + s, Tensor(1, hidden));
  }
}

Var rnn_cell(Tape& t, const std::string& prefix, Var h, Var x) {
  return t.tanh(gate_pre(t, prefix, 'h', x, h));
}

Var gru_cell(Tape& t, const std::string& prefix, Var h, Var x) {
  Var z = t.sigmoid(gate_pre(t, prefix, 'z', x, h));
  Var r = t.sigmoid(gate_pre(t, prefix, 'r', x, h));
  Var n = t.tanh(gate_pre(t, prefix, 'n', x, t.hadamard(r, h)));
  return t.add(t.hadamard(t.one_minus(z), n), t.hadamard(z, h));
}

LstmOut lstm_cell(Tape& t, const std::string& prefix, Var h, Var c, Var x) {
  Var i = t.sigmoid(gate_pre(t, prefix, 'i', x, h));
  Var f = t.sigmoid(gate_pre(t, prefix, 'f', x, h));
  Var o = t.sigmoid(gate_pre(t, prefix, 'o', x, h));
  Var g = t.tanh(gate_pre(t, prefix, 'g', x, h));
  Var c2 = t.add(t.hadamard(f, c), t.hadamard(i, g));
  return {t.hadamard(o, t.tanh(c2)), c2};
}

}  // namespace amp
