#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "apr/num/param_store.hpp"

namespace apr::num {

/// Handle to a value recorded on a Tape.
struct Var {
  std::uint32_t id = 0;
};

/// Record of a forward computation for reverse-mode differentiation.
///
/// Every operation appends a node holding its value and a closure that pushes the
/// node's gradient into its inputs. backward() walks the record in reverse and
/// accumulates parameter gradients into the owning ParamStore. A tape built with
/// `recording == false` keeps values only and cannot be differentiated.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Tensor& grad_out, const Tensor& value_out)>;

  explicit Tape(ParamStore& store, bool recording = true);
  /// Inference-only tape over a frozen store.
  explicit Tape(const ParamStore& store);

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Whole parameter tensor; repeated calls return the same node.
  Var param(ParamId p);
  /// Row `r` of a parameter table, returned as a column vector.
  Var row(ParamId table, Index r);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  /// Gradient buffer of `v`, zero-initialised on first access.
  Tensor& grad(Var v);

  /// Appends a node. Non-finite values raise NumericError.
  Var record(Tensor value, Backward backward);

  bool recording() const noexcept { return recording_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  ParamStore& store() noexcept { return *store_; }

  /// Seeds d(root)/d(root) = 1 for a 1x1 root and propagates to parameters.
  void backward(Var root);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Backward backward;
  };
  ParamStore* store_;
  bool recording_;
  std::vector<Node> nodes_;
  std::vector<std::optional<Var>> param_nodes_;
};

}  // namespace apr::num
