#pragma once

#include <random>
#include <string>

#include "apr/num/tape.hpp"

namespace apr::num {

/// Parameters of one LSTM cell. Gate rows are stacked as [input; forget; output; candidate].
struct LstmWeights {
  ParamId w_x;  // 4H x input_dim
  ParamId w_h;  // 4H x H
  ParamId b;    // 4H x 1
  Index input_dim = 0;
  Index hidden_dim = 0;
};

struct LstmState {
  Var h;
  Var c;
};

/// Registers "<prefix>.w_x", "<prefix>.w_h" and "<prefix>.b" with Xavier weights and a
/// zero bias.
LstmWeights add_lstm(ParamStore& store, const std::string& prefix, Index input_dim, Index hidden_dim,
                     std::mt19937_64& rng);

/// i, f, o = sigmoid(...), g = tanh(...), c = f*c_prev + i*g, h = o*tanh(c).
LstmState lstm_step(Tape& t, const LstmWeights& w, Var x, Var h_prev, Var c_prev);

}  // namespace apr::num
