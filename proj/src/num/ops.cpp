#include "apr/num/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "apr/error.hpp"

namespace apr::num {
namespace {

std::string shape(const Tensor& t) {
  std::ostringstream s;
  s << '(' << t.rows() << 'x' << t.cols() << ')';
  return s.str();
}

[[noreturn]] void mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw ContractError(std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
}

void require_vector(const char* op, const Tensor& x) {
  if (x.cols() != 1 || x.rows() < 1) {
    throw ContractError(std::string(op) + ": expected a non-empty column vector, got " + shape(x));
  }
}

Tensor scalar(Scalar v) {
  Tensor out(1, 1);
  out(0, 0) = v;
  return out;
}

}  // namespace

Scalar sigmoid(Scalar x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (1.0 + e);
}

Tensor softmax(const Tensor& x) {
  Tensor e = (x.array() - x.maxCoeff()).exp().matrix();
  return e / e.sum();
}

Var affine(Tape& t, Var w, Var x, Var b) {
  const auto& W = t.value(w);
  const auto& X = t.value(x);
  const auto& B = t.value(b);
  if (W.cols() != X.rows()) mismatch("affine", W, X);
  if (B.cols() != 1 || B.rows() != W.rows()) mismatch("affine bias", W, B);
  Tensor out = W * X;
  out.colwise() += B.col(0);
  return t.record(std::move(out), [w, x, b](Tape& t, const Tensor& g, const Tensor&) {
    t.grad(w).noalias() += g * t.value(x).transpose();
    t.grad(x).noalias() += t.value(w).transpose() * g;
    t.grad(b) += g.rowwise().sum();
  });
}

Var matmul(Tape& t, Var a, Var b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  if (A.cols() != B.rows()) mismatch("matmul", A, B);
  return t.record(A * B, [a, b](Tape& t, const Tensor& g, const Tensor&) {
    t.grad(a).noalias() += g * t.value(b).transpose();
    t.grad(b).noalias() += t.value(a).transpose() * g;
  });
}

Var add(Tape& t, Var a, Var b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  if (A.rows() != B.rows() || A.cols() != B.cols()) mismatch("add", A, B);
  return t.record(A + B, [a, b](Tape& t, const Tensor& g, const Tensor&) {
    t.grad(a) += g;
    t.grad(b) += g;
  });
}

Var add_cols(Tape& t, Var m, Var v) {
  const auto& M = t.value(m);
  const auto& V = t.value(v);
  if (V.cols() != 1 || V.rows() != M.rows()) mismatch("add_cols", M, V);
  Tensor out = M;
  out.colwise() += V.col(0);
  return t.record(std::move(out), [m, v](Tape& t, const Tensor& g, const Tensor&) {
    t.grad(m) += g;
    t.grad(v) += g.rowwise().sum();
  });
}

Var hadamard(Tape& t, Var a, Var b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  if (A.rows() != B.rows() || A.cols() != B.cols()) mismatch("hadamard", A, B);
  return t.record(A.cwiseProduct(B), [a, b](Tape& t, const Tensor& g, const Tensor&) {
    t.grad(a) += g.cwiseProduct(t.value(b));
    t.grad(b) += g.cwiseProduct(t.value(a));
  });
}

Var scale(Tape& t, Var a, Scalar k) {
  return t.record(t.value(a) * k, [a, k](Tape& t, const Tensor& g, const Tensor&) { t.grad(a) += g * k; });
}

Var transpose(Tape& t, Var a) {
  return t.record(t.value(a).transpose(),
                  [a](Tape& t, const Tensor& g, const Tensor&) { t.grad(a) += g.transpose(); });
}

Var sigmoid(Tape& t, Var x) {
  Tensor y = t.value(x).unaryExpr([](Scalar v) { return sigmoid(v); });
  return t.record(std::move(y), [x](Tape& t, const Tensor& g, const Tensor& y) {
    t.grad(x).array() += g.array() * y.array() * (1.0 - y.array());
  });
}

Var tanh(Tape& t, Var x) {
  Tensor y = t.value(x).array().tanh().matrix();
  return t.record(std::move(y), [x](Tape& t, const Tensor& g, const Tensor& y) {
    t.grad(x).array() += g.array() * (1.0 - y.array().square());
  });
}

Var softmax(Tape& t, Var x) {
  require_vector("softmax", t.value(x));
  return t.record(softmax(t.value(x)), [x](Tape& t, const Tensor& g, const Tensor& y) {
    const Scalar dot = (g.array() * y.array()).sum();
    t.grad(x).array() += y.array() * (g.array() - dot);
  });
}

Var concat(Tape& t, std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat: no inputs");
  Index rows = 0;
  for (const auto p : parts) {
    require_vector("concat", t.value(p));
    rows += t.value(p).rows();
  }
  Tensor out(rows, 1);
  Index at = 0;
  for (const auto p : parts) {
    const auto& v = t.value(p);
    out.middleRows(at, v.rows()) = v;
    at += v.rows();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.record(std::move(out), [inputs](Tape& t, const Tensor& g, const Tensor&) {
    Index at = 0;
    for (const auto p : inputs) {
      const auto n = t.value(p).rows();
      t.grad(p) += g.middleRows(at, n);
      at += n;
    }
  });
}

Var hstack(Tape& t, std::span<const Var> columns) {
  if (columns.empty()) throw ContractError("hstack: no inputs");
  const auto rows = t.value(columns.front()).rows();
  Tensor out(rows, static_cast<Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const auto& v = t.value(columns[j]);
    if (v.cols() != 1 || v.rows() != rows) mismatch("hstack", t.value(columns.front()), v);
    out.col(static_cast<Index>(j)) = v.col(0);
  }
  std::vector<Var> inputs(columns.begin(), columns.end());
  return t.record(std::move(out), [inputs](Tape& t, const Tensor& g, const Tensor&) {
    for (std::size_t j = 0; j < inputs.size(); ++j) t.grad(inputs[j]) += g.col(static_cast<Index>(j));
  });
}

Var slice_rows(Tape& t, Var x, Index start, Index count) {
  const auto& X = t.value(x);
  if (start < 0 || count < 0 || start + count > X.rows()) {
    throw ContractError("slice_rows: range [" + std::to_string(start) + ", " +
                        std::to_string(start + count) + ") outside " + shape(X));
  }
  return t.record(X.middleRows(start, count), [x, start, count](Tape& t, const Tensor& g, const Tensor&) {
    t.grad(x).middleRows(start, count) += g;
  });
}

Var sum(Tape& t, Var x) {
  require_vector("sum", t.value(x));
  return t.record(scalar(t.value(x).sum()),
                  [x](Tape& t, const Tensor& g, const Tensor&) { t.grad(x).array() += g(0, 0); });
}

Var mean(Tape& t, Var x) {
  require_vector("mean", t.value(x));
  const auto n = static_cast<Scalar>(t.value(x).rows());
  return t.record(scalar(t.value(x).mean()),
                  [x, n](Tape& t, const Tensor& g, const Tensor&) { t.grad(x).array() += g(0, 0) / n; });
}

Var max(Tape& t, Var x) {
  const auto& X = t.value(x);
  require_vector("max", X);
  Index arg = 0;
  for (Index i = 1; i < X.rows(); ++i) {
    if (X(i, 0) > X(arg, 0)) arg = i;
  }
  return t.record(scalar(X(arg, 0)), [x, arg](Tape& t, const Tensor& g, const Tensor&) { t.grad(x)(arg, 0) += g(0, 0); });
}

Var logsumexp(Tape& t, Var x) {
  const auto& X = t.value(x);
  require_vector("logsumexp", X);
  const Scalar m = X.maxCoeff();
  const Scalar lse = m + std::log((X.array() - m).exp().sum());
  return t.record(scalar(lse), [x](Tape& t, const Tensor& g, const Tensor&) {
    t.grad(x) += g(0, 0) * softmax(t.value(x));
  });
}

Var topk_mean(Tape& t, Var x, Index k) {
  const auto& X = t.value(x);
  require_vector("topk_mean", X);
  if (k < 1) throw ContractError("topk_mean: k must be at least 1");
  const Index n = X.rows();
  const Index kk = std::min(k, n);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return X(a, 0) > X(b, 0); });
  order.resize(static_cast<std::size_t>(kk));
  Scalar total = 0.0;
  for (const auto i : order) total += X(i, 0);
  const auto denom = static_cast<Scalar>(kk);
  return t.record(scalar(total / denom), [x, order, denom](Tape& t, const Tensor& g, const Tensor&) {
    auto& gx = t.grad(x);
    for (const auto i : order) gx(i, 0) += g(0, 0) / denom;
  });
}

Var binary_nll(Tape& t, Var prob, bool label) {
  const auto& P = t.value(prob);
  if (P.rows() != 1 || P.cols() != 1) throw ContractError("binary_nll: probability must be 1x1");
  const Scalar p = P(0, 0);
  const Scalar q = label ? p : 1.0 - p;
  const Scalar clamped = std::clamp(q, kProbClamp, 1.0 - kProbClamp);
  const bool active = clamped == q;
  return t.record(scalar(-std::log(clamped)), [prob, label, clamped, active](Tape& t, const Tensor& g, const Tensor&) {
    if (!active) return;
    const Scalar d = -1.0 / clamped;  // d(-log q)/dq
    t.grad(prob)(0, 0) += g(0, 0) * (label ? d : -d);
  });
}

}  // namespace apr::num
