#pragma once

#include <span>

#include "apr/num/tape.hpp"

namespace apr::num {

// Differentiable primitives. Column vectors are (n x 1) tensors. Shape mismatches
// raise ContractError naming both shapes.

/// W X + b, with b broadcast across the columns of X.
Var affine(Tape& t, Var w, Var x, Var b);
Var matmul(Tape& t, Var a, Var b);
Var add(Tape& t, Var a, Var b);
/// M + v broadcast across the columns of M.
Var add_cols(Tape& t, Var m, Var v);
Var hadamard(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, Scalar k);
Var transpose(Tape& t, Var a);

Var sigmoid(Tape& t, Var x);
Var tanh(Tape& t, Var x);
/// Softmax of a column vector, computed with the maximum subtracted.
Var softmax(Tape& t, Var x);

/// Stacks column vectors vertically.
Var concat(Tape& t, std::span<const Var> parts);
/// Places column vectors side by side as the columns of a matrix.
Var hstack(Tape& t, std::span<const Var> columns);
Var slice_rows(Tape& t, Var x, Index start, Index count);

// Reductions of a column vector to a 1x1 scalar.
Var sum(Tape& t, Var x);
Var mean(Tape& t, Var x);
/// Gradient goes to the first maximal entry.
Var max(Tape& t, Var x);
Var logsumexp(Tape& t, Var x);
/// Mean of the k largest entries (all entries when k exceeds the length); ties favour
/// lower indices.
Var topk_mean(Tape& t, Var x, Index k);

/// Smallest probability admitted before a logarithm.
inline constexpr Scalar kProbClamp = 1e-12;

/// -log P for a positive label, -log(1 - P) for a negative one, P clamped to
/// [1e-12, 1 - 1e-12]. A clamped probability passes no gradient.
Var binary_nll(Tape& t, Var prob, bool label);

/// Plain scalar helpers used outside the tape.
Scalar sigmoid(Scalar x);
Tensor softmax(const Tensor& x);

}  // namespace apr::num
