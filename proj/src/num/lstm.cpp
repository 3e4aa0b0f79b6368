#include "apr/num/lstm.hpp"

#include <array>

#include "apr/error.hpp"
#include "apr/num/ops.hpp"

namespace apr::num {

LstmWeights add_lstm(ParamStore& store, const std::string& prefix, Index input_dim, Index hidden_dim,
                     std::mt19937_64& rng) {
  if (input_dim < 1 || hidden_dim < 1) throw ContractError("LSTM dimensions must be positive");
  LstmWeights w;
  w.input_dim = input_dim;
  w.hidden_dim = hidden_dim;
  w.w_x = store.add(prefix + ".w_x", xavier_uniform(4 * hidden_dim, input_dim, rng));
  w.w_h = store.add(prefix + ".w_h", xavier_uniform(4 * hidden_dim, hidden_dim, rng));
  w.b = store.add(prefix + ".b", Tensor::Zero(4 * hidden_dim, 1));
  return w;
}

LstmState lstm_step(Tape& t, const LstmWeights& w, Var x, Var h_prev, Var c_prev) {
  const Index H = w.hidden_dim;
  if (t.value(x).rows() != w.input_dim || t.value(x).cols() != 1) {
    throw ContractError("lstm_step: input has " + std::to_string(t.value(x).rows()) + " rows, expected " +
                        std::to_string(w.input_dim));
  }
  if (t.value(h_prev).rows() != H || t.value(c_prev).rows() != H) {
    throw ContractError("lstm_step: state size does not match hidden dimension " + std::to_string(H));
  }
  const Var zx = affine(t, t.param(w.w_x), x, t.param(w.b));
  const Var z = add(t, zx, matmul(t, t.param(w.w_h), h_prev));
  const Var i = sigmoid(t, slice_rows(t, z, 0, H));
  const Var f = sigmoid(t, slice_rows(t, z, H, H));
  const Var o = sigmoid(t, slice_rows(t, z, 2 * H, H));
  const Var g = tanh(t, slice_rows(t, z, 3 * H, H));
  const Var c = add(t, hadamard(t, f, c_prev), hadamard(t, i, g));
  const Var h = hadamard(t, o, tanh(t, c));
  return {h, c};
}

}  // namespace apr::num
