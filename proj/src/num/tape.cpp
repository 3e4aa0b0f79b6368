#include "apr/num/tape.hpp"

#include "apr/error.hpp"

namespace apr::num {

Tape::Tape(ParamStore& store, bool recording)
    : store_(&store), recording_(recording), param_nodes_(store.size()) {}

// A non-recording tape never writes to the store, so the cast is never used to mutate.
Tape::Tape(const ParamStore& store)
    : store_(const_cast<ParamStore*>(&store)), recording_(false), param_nodes_(store.size()) {}

Var Tape::record(Tensor value, Backward backward) {
  if (!value.allFinite()) throw NumericError("non-finite value produced on the tape");
  const Var v{static_cast<std::uint32_t>(nodes_.size())};
  nodes_.push_back({std::move(value), Tensor(), recording_ ? std::move(backward) : Backward()});
  return v;
}

Var Tape::constant(Tensor value) { return record(std::move(value), {}); }

Var Tape::param(ParamId p) {
  auto& slot = param_nodes_.at(p.index);
  if (!slot) {
    slot = record(store_->value(p), [p](Tape& t, const Tensor& g, const Tensor&) { t.store().grad(p) += g; });
  }
  return *slot;
}

Var Tape::row(ParamId table, Index r) {
  const auto& v = store_->value(table);
  if (r < 0 || r >= v.rows()) throw LookupError("table row out of range in '" + store_->name(table) + "'");
  return record(v.row(r).transpose(), [table, r](Tape& t, const Tensor& g, const Tensor&) {
    t.store().grad(table).row(r) += g.transpose();
  });
}

Tensor& Tape::grad(Var v) {
  auto& node = nodes_[v.id];
  if (node.grad.size() == 0) node.grad = Tensor::Zero(node.value.rows(), node.value.cols());
  return node.grad;
}

void Tape::backward(Var root) {
  if (!recording_) throw ContractError("backward() on a tape that did not record gradients");
  const auto& rv = nodes_.at(root.id).value;
  if (rv.rows() != 1 || rv.cols() != 1) throw ContractError("backward() root must be a 1x1 scalar");
  grad(root)(0, 0) += 1.0;
  for (auto i = static_cast<std::int64_t>(root.id); i >= 0; --i) {
    auto& node = nodes_[static_cast<std::size_t>(i)];
    if (node.grad.size() == 0 || !node.backward) continue;
    node.backward(*this, node.grad, node.value);
  }
}

}  // namespace apr::num
