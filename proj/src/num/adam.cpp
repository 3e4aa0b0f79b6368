#include "apr/num/adam.hpp"

#include <cmath>

#include "apr/error.hpp"

namespace apr::num {

AdamState make_adam_state(const ParamStore& store, AdamConfig config) {
  AdamState s;
  s.config = config;
  for (std::uint32_t i = 0; i < store.size(); ++i) {
    const auto& v = store.value(ParamId{i});
    s.m.push_back(Tensor::Zero(v.rows(), v.cols()));
    s.v.push_back(Tensor::Zero(v.rows(), v.cols()));
  }
  return s;
}

void adam_update(ParamStore& store, AdamState& state) {
  if (state.m.size() != store.size()) throw ContractError("Adam state does not match the parameter store");
  const auto& c = state.config;
  ++state.t;
  const Scalar bc1 = 1.0 - std::pow(c.beta1, static_cast<Scalar>(state.t));
  const Scalar bc2 = 1.0 - std::pow(c.beta2, static_cast<Scalar>(state.t));
  for (std::uint32_t i = 0; i < store.size(); ++i) {
    const ParamId id{i};
    auto& g = store.grad(id);
    auto& m = state.m[i];
    auto& v = state.v[i];
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v.array() = c.beta2 * v.array() + (1.0 - c.beta2) * g.array().square();
    store.value(id).array() -= c.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.eps);
    g.setZero();
  }
  if (!store.all_finite()) throw NumericError("Adam update produced non-finite parameters");
}

}  // namespace apr::num
