#pragma once

#include <random>
#include <string>

#include "amp/autodiff.h"

namespace amp {

enum class CellKind { kRnn, kGru, kLstm };

const char* to_string(CellKind kind);
CellKind cell_kind_from_string(const std::string& s);

// Registers the weights of one cell under `prefix`. Input-to-hidden
// matrices are in_width x hidden, hidden-to-hidden matrices hidden x hidden,
// biases 1 x hidden (zero).
void add_cell_params(ParameterStore& store, const std::string& prefix, CellKind kind,
                     int in_width, int hidden, std::mt19937_64& rng);

// h' = tanh(x Wx + h Wh + b)
Var rnn_cell(Tape& t, const std::string& prefix, Var h, Var x);

// z = sigmoid(x Wz + h Uz + bz), r = sigmoid(x Wr + h Ur + br),
// n = tanh(x Wn + (r * h) Un + bn), h' = (1 - z) * n + z * h
Var gru_cell(Tape& t, const std::string& prefix, Var h, Var x);

struct LstmOut {
  Var h;
  Var c;
};

// i, f, o = sigmoid(x W. + h U. + b.), g = tanh(x Wg + h Ug + bg),
// c' = f * c + i * g, h' = o * tanh(c')
LstmOut lstm_cell(Tape& t, const std::string& prefix, Var h, Var c, Var x);

}  // namespace amp
